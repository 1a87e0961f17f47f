// Copyright 2026 The dtherm Authors
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

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>
#include <utility>

namespace dtherm {

/// Counter-based generator. Draw i of stream (seed, stream_index) is
///
///   key    = mix64(seed ^ mix64(stream_index + 0x632BE59BD9B4E019))
///   out[i] = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
///
/// where mix64 is the SplitMix64 finaliser. Output depends only on
/// (seed, stream_index, i), so trials can be scheduled on any thread.
class RngStream {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view kMixerId = "splitmix64-counter-v1";
  static constexpr std::string_view kNormalId = "box-muller-v1";

  RngStream(std::uint64_t seed, std::uint64_t stream_index)
      : seed_(seed), stream_index_(stream_index),
        key_(mix64(seed ^ mix64(stream_index + 0x632BE59BD9B4E019ULL))) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_positive() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

  /// Two independent standard normals from two uniforms (Box-Muller).
  std::pair<double, double> normal_pair() {
    const double u1 = uniform_positive();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_index_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dtherm
