// Copyright 2026 The Revelight Authors. All Rights Reserved.
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
#include <cstdint>

namespace revelight {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output block is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// What a stream is used for. Part of the stream address so that two
/// consumers never share draws.
enum class Purpose : std::uint16_t {
  kSample = 1,
  kClientDirection = 2,
  kServerDirection = 3,
  kComputeTime = 4,
  kLatency = 5,
  kInit = 6,
  kData = 7,
  kSplit = 8,
  kMonteCarlo = 9,
  kInstance = 10,
  kLipschitz = 11,
};

/// Address of an independent random stream: (seed, owner, purpose, index).
/// Owner is a party id (1..q), 0 for the server or a shared stream.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint16_t owner = 0;
  Purpose purpose = Purpose::kSample;
  std::uint64_t index = 0;
};

/// Sequential reader over the Philox blocks of one stream address. Cheap to
/// construct; two readers with the same key produce identical sequences.
class Stream {
 public:
  explicit Stream(const StreamKey& key) noexcept;
  Stream(std::uint64_t seed, std::uint16_t owner, Purpose purpose,
         std::uint64_t index) noexcept
      : Stream(StreamKey{seed, owner, purpose, index}) {}

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal via Box-Muller; the second variate of each pair is kept.
  double normal() noexcept;
  /// Uniform integer in [0, n). Unbiased (rejection on the 64-bit draw).
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Exponential with the given mean.
  double exponential(double mean) noexcept;

 private:
  Philox4x32::Counter ctr_{};
  Philox4x32::Key key_{};
  Philox4x32::Counter buf_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace revelight
