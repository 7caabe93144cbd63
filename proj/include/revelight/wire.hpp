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

// Binary framing for everything that crosses the party/server boundary.
//
// Frame layout (all integers and floats little-endian):
//
//   u32 length   bytes that follow this field (header + payload)
//   u8  tag      message variant
//   u32 party
//   u32 sample
//   u32 seq
//   u16 veclen   length of each payload vector
//   f64 payload[(length - 15) / 8]
//
// Upload carries c and c_hat (2 * veclen floats), Reply carries h and h_bar
// (veclen = 1), Query has no payload, Refresh carries one c. Tags >= 0x10 are
// reserved for the gradient-transmitting baseline.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "revelight/models.hpp"

namespace revelight {

enum class Tag : std::uint8_t {
  kUpload = 0,
  kReply = 1,
  kQuery = 2,
  kRefresh = 3,
  kTigUpload = 0x10,
  kTigGradReply = 0x11,
  kTigGradReport = 0x12,
};

inline constexpr std::size_t kLengthPrefix = 4;
inline constexpr std::size_t kHeaderBytes = 1 + 4 + 4 + 4 + 2;

std::string_view tag_name(Tag tag);
std::optional<Tag> tag_from_name(std::string_view name);

/// Untyped frame; what the transcript stores and the audit inspects.
struct Frame {
  Tag tag = Tag::kUpload;
  std::uint32_t party = 0;
  std::uint32_t sample = 0;
  std::uint32_t seq = 0;
  std::uint16_t veclen = 0;
  Vec payload;

  /// Encoded size including the length prefix.
  std::size_t encoded_size() const { return kLengthPrefix + kHeaderBytes + 8 * payload.size(); }
  bool operator==(const Frame&) const = default;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);
/// Decodes one frame from the front of `bytes`; `consumed` receives its size.
/// Throws DecodeError naming the byte offset of the problem.
Frame decode_frame(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

struct Upload {
  std::uint32_t party = 0;
  std::uint32_t sample = 0;
  std::uint32_t seq = 0;
  Vec c;
  Vec c_hat;
  bool operator==(const Upload&) const = default;
};

struct Reply {
  std::uint32_t party = 0;
  std::uint32_t sample = 0;
  std::uint32_t seq = 0;
  double h = 0.0;
  double h_bar = 0.0;
  bool operator==(const Reply&) const = default;
};

/// Server asks a party for its current output on one sample.
struct Query {
  std::uint32_t party = 0;
  std::uint32_t sample = 0;
  std::uint32_t seq = 0;
  bool operator==(const Query&) const = default;
};

/// Answer to a Query.
struct Refresh {
  std::uint32_t party = 0;
  std::uint32_t sample = 0;
  std::uint32_t seq = 0;
  Vec c;
  bool operator==(const Refresh&) const = default;
};

using WireMessage = std::variant<Upload, Reply, Query, Refresh>;

Frame to_frame(const WireMessage& msg);
/// Throws DecodeError for a tag outside the function-value protocol or a
/// payload that does not match the variant's shape.
WireMessage from_frame(const Frame& frame);

std::vector<std::uint8_t> encode_message(const WireMessage& msg);
WireMessage decode_message(std::span<const std::uint8_t> bytes);

enum class Flow : std::uint8_t { kUp, kDown };  // up: party -> server

struct TranscriptEntry {
  double time = 0.0;
  Flow flow = Flow::kUp;
  Frame frame;
  std::size_t bytes = 0;
};

/// Append-only log of every frame on the wire. When `keep_entries` is false
/// only the byte counters are maintained.
class Transcript {
 public:
  explicit Transcript(bool keep_entries = true) : keep_(keep_entries) {}

  void append(double time, Flow flow, Frame frame);
  void append(double time, Flow flow, const WireMessage& msg) { append(time, flow, to_frame(msg)); }

  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  std::size_t size() const { return count_; }
  bool keeps_entries() const { return keep_; }
  std::size_t bytes_up() const { return bytes_up_; }
  std::size_t bytes_down() const { return bytes_down_; }
  std::size_t total_bytes() const { return bytes_up_ + bytes_down_; }
  std::size_t count(Tag tag) const;

  /// One JSON object per line: time, dir, variant, party, sample, seq,
  /// payload, bytes.
  void write_jsonl(std::ostream& out) const;
  static Transcript read_jsonl(std::istream& in);

 private:
  bool keep_ = true;
  std::vector<TranscriptEntry> entries_;
  std::size_t count_ = 0;
  std::size_t bytes_up_ = 0;
  std::size_t bytes_down_ = 0;
};

struct AuditDims {
  std::size_t max_output_dim = 1;
  std::vector<std::size_t> block_dims;  // d_1..d_q and d_0 when non-zero
};

struct AuditResult {
  bool pass = true;
  std::optional<std::size_t> entry;  // first offending entry
  std::string reason;
};

/// Passes iff every payload vector is no longer than the widest local output.
/// Blocks no wider than that output cannot be told apart by shape, so a length
/// matching a parameter block is only reported when it is also too long.
AuditResult audit_transcript(const Transcript& transcript, const AuditDims& dims);

}  // namespace revelight
