// Copyright 2026 The GLN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

#include "gln/hash.hpp"

namespace gln {

// Seeded random stream. The engine is mt19937_64, whose output sequence is
// fixed by the C++ standard; bounded draws use rejection sampling instead of
// std::uniform_int_distribution (whose algorithm is implementation-defined)
// so samples reproduce on every platform.
//
// A stream is keyed by (seed, tag, key): each operation uses its own tag and
// each node its own key, so no two calls share mutable state.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view tag, std::string_view key = {})
      : engine_(splitmix64(splitmix64(seed) ^ fnv1a64(tag)) ^
                splitmix64(fnv1a64(key))) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Partial Fisher-Yates: afterwards items[0..k) is a uniform sample without
  // replacement, in draw order.
  template <typename T>
  void select_prefix(std::span<T> items, std::size_t k) {
    if (k > items.size()) k = items.size();
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(below(items.size() - i));
      using std::swap;
      swap(items[i], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    select_prefix(items, items.size());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gln
