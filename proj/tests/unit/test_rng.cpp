// Copyright 2026 The rswitch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rswitch/rng.hpp"

using namespace rswitch;

TEST_CASE("Philox4x32-10 known answers") {
  // Reference vectors published with the Random123 library.
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::apply(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::apply(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("unit_open stays strictly inside (0, 1)") {
  CHECK(unit_open(0, 0) > 0.0);
  CHECK(unit_open(0xffffffff, 0xffffffff) < 1.0);
}

TEST_CASE("streams are addressable and distinct") {
  const RandomStream a(42, StreamTag::Gaussian, 0);
  const RandomStream b(42, StreamTag::Jump, 0);
  const RandomStream c(42, StreamTag::Gaussian, 1);
  const RandomStream d(43, StreamTag::Gaussian, 0);
  CHECK(a.block(5) == RandomStream(42, StreamTag::Gaussian, 0).block(5));
  CHECK(a.block(5) != b.block(5));
  CHECK(a.block(5) != c.block(5));
  CHECK(a.block(5) != d.block(5));
  CHECK(a.block(5) != a.block(6));
}

TEST_CASE("uniforms pass a Kolmogorov-Smirnov check") {
  const RandomStream s(7, StreamTag::Jump, 3);
  std::vector<double> u;
  const std::size_t n = 20000;
  for (std::uint64_t k = 0; u.size() < n; ++k) {
    const auto pair = s.uniforms(k);
    u.push_back(pair[0]);
    u.push_back(pair[1]);
  }
  std::sort(u.begin(), u.end());
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = u[i];
    dmax = std::max({dmax, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  CHECK(dmax < oracle::ks_critical_1pct(n));
}

TEST_CASE("normals have unit variance and pass a Kolmogorov-Smirnov check") {
  const RandomStream s(11, StreamTag::Gaussian, 0);
  std::vector<double> z;
  const std::size_t n = 20000;
  for (std::uint64_t k = 0; z.size() < n; ++k) {
    const auto pair = s.normals(k);
    z.push_back(pair[0]);
    z.push_back(pair[1]);
  }
  double mean = 0.0, sq = 0.0;
  for (double v : z) {
    mean += v;
    sq += v * v;
  }
  mean /= n;
  sq /= n;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sq - 1.0) < 4.0 * std::sqrt(2.0 / n));

  std::sort(z.begin(), z.end());
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
    dmax = std::max({dmax, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  CHECK(dmax < oracle::ks_critical_1pct(n));
}
