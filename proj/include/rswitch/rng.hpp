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

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace rswitch {

// Philox4x32-10 counter-based generator: a keyed bijection of 128-bit
// counters, so any draw can be addressed directly by its coordinates.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter c, Key k) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += kW0;
        k[1] += kW1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

// 53-bit uniform in the open interval (0, 1).
constexpr double unit_open(std::uint32_t hi, std::uint32_t lo) noexcept {
  // 52 bits so that the half-ulp offset keeps the top value below one.
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

enum class StreamTag : std::uint32_t { Gaussian = 0, Jump = 1 };

// One independent stream per (seed, tag, path). Draw `index` is the Philox
// image of the counter (index, tag | path).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t path) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        tag_(static_cast<std::uint32_t>(tag)),
        path_(path) {}

  Philox4x32::Counter block(std::uint64_t index) const noexcept {
    const Philox4x32::Counter c{
        static_cast<std::uint32_t>(index),
        static_cast<std::uint32_t>(index >> 32) ^ (tag_ << 31),
        static_cast<std::uint32_t>(path_),
        static_cast<std::uint32_t>(path_ >> 32),
    };
    return Philox4x32::apply(c, key_);
  }

  // Two uniforms in (0, 1) from one counter.
  std::array<double, 2> uniforms(std::uint64_t index) const noexcept {
    const auto r = block(index);
    return {unit_open(r[0], r[1]), unit_open(r[2], r[3])};
  }

  // Two independent standard normals by Box-Muller.
  std::array<double, 2> normals(std::uint64_t index) const noexcept {
    const auto [u1, u2] = uniforms(index);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t tag_;
  std::uint64_t path_;
};

}  // namespace rswitch
