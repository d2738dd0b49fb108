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


#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "gln/hash.hpp"
#include "gln/rng.hpp"

namespace gln {
namespace {

TEST(Hash, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(short_digest("abc"), "ba7816bf8f01cfea");
}

TEST(Hash, Fnv1aKnownVectors) {
  static_assert(fnv1a64("") == 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Rng, SameKeySameStream) {
  Rng a(7, "tag", "key"), b(7, "tag", "key");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, StreamsDifferByTagKeyAndSeed) {
  const auto first = [](std::uint64_t seed, const char* tag, const char* key) {
    return Rng(seed, tag, key).next();
  };
  std::set<std::uint64_t> seen = {first(1, "a", "x"), first(1, "b", "x"), first(1, "a", "y"),
                                  first(2, "a", "x")};
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Rng, BelowStaysInRange) {
  Rng rng(3, "below");
  for (std::uint64_t n : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 5}) {
    for (int i = 0; i < 200; ++i) EXPECT_LT(rng.below(n), n);
  }
}

// Pearson chi-square over the 24 orderings of 4 items; 23 degrees of freedom,
// 0.999 quantile about 49.73.
TEST(Rng, ShuffleIsUniformOverPermutations) {
  std::map<std::array<int, 4>, int> counts;
  const int trials = 48000;
  for (int t = 0; t < trials; ++t) {
    std::array<int, 4> a = {0, 1, 2, 3};
    Rng rng(11, "perm", std::to_string(t));
    rng.shuffle(std::span<int>(a));
    ++counts[a];
  }
  ASSERT_EQ(counts.size(), 24u);
  const double expected = trials / 24.0;
  double chi2 = 0;
  for (const auto& [_, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 49.73);
}

TEST(Rng, SelectPrefixDrawsDistinctItems) {
  std::vector<int> items(50);
  std::iota(items.begin(), items.end(), 0);
  Rng rng(5, "prefix");
  rng.select_prefix(std::span(items), 20);
  std::set<int> prefix(items.begin(), items.begin() + 20);
  EXPECT_EQ(prefix.size(), 20u);
  std::set<int> all(items.begin(), items.end());
  EXPECT_EQ(all.size(), 50u);
}

}  // namespace
}  // namespace gln
