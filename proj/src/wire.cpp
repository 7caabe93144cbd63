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

#include "revelight/wire.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "revelight/errors.hpp"

namespace revelight {

namespace {

constexpr std::pair<Tag, std::string_view> kTagNames[] = {
    {Tag::kUpload, "upload"},
    {Tag::kReply, "reply"},
    {Tag::kQuery, "query"},
    {Tag::kRefresh, "refresh"},
    {Tag::kTigUpload, "tig_upload"},
    {Tag::kTigGradReply, "tig_grad_reply"},
    {Tag::kTigGradReport, "tig_grad_report"},
};

std::string hex(std::uint8_t v) {
  static const char* digits = "0123456789abcdef";
  return std::string("0x") + digits[v >> 4] + digits[v & 15];
}

class Writer {
 public:
  explicit Writer(std::size_t reserve) { out_.reserve(reserve); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int width) {
    for (int b = 0; b < width; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  std::vector<std::uint8_t> out_;
};

std::uint64_t read_le(std::span<const std::uint8_t> bytes, std::size_t off, int width) {
  std::uint64_t v = 0;
  for (int b = 0; b < width; ++b) v |= static_cast<std::uint64_t>(bytes[off + b]) << (8 * b);
  return v;
}

void require_shape(bool ok, const Frame& f, const char* what) {
  if (!ok)
    throw DecodeError("length mismatch at offset " + std::to_string(kLengthPrefix + kHeaderBytes) +
                      ": " + std::string(tag_name(f.tag)) + " " + what + " (veclen " +
                      std::to_string(f.veclen) + ", " + std::to_string(f.payload.size()) +
                      " floats)");
}

std::uint16_t checked_veclen(std::size_t n) {
  if (n > UINT16_MAX) throw ShapeError("payload vector too long for the wire format");
  return static_cast<std::uint16_t>(n);
}

}  // namespace

std::string_view tag_name(Tag tag) {
  for (const auto& [t, name] : kTagNames)
    if (t == tag) return name;
  return "unknown";
}

std::optional<Tag> tag_from_name(std::string_view name) {
  for (const auto& [t, n] : kTagNames)
    if (n == name) return t;
  return std::nullopt;
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  for (double v : frame.payload)
    if (!std::isfinite(v)) throw DomainError("cannot encode a non-finite payload value");
  const std::size_t length = kHeaderBytes + 8 * frame.payload.size();
  Writer w(kLengthPrefix + length);
  w.u32(static_cast<std::uint32_t>(length));
  w.u8(static_cast<std::uint8_t>(frame.tag));
  w.u32(frame.party);
  w.u32(frame.sample);
  w.u32(frame.seq);
  w.u16(frame.veclen);
  for (double v : frame.payload) w.f64(v);
  return w.take();
}

Frame decode_frame(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  if (bytes.size() < kLengthPrefix) throw DecodeError("truncated header at offset 0");
  const std::size_t length = read_le(bytes, 0, 4);
  if (length < kHeaderBytes)
    throw DecodeError("truncated header at offset 4: length field " + std::to_string(length) +
                      " is shorter than the " + std::to_string(kHeaderBytes) + "-byte header");
  if (bytes.size() < kLengthPrefix + kHeaderBytes)
    throw DecodeError("truncated header at offset " + std::to_string(bytes.size()));
  if (bytes.size() < kLengthPrefix + length)
    throw DecodeError("truncated frame at offset " + std::to_string(bytes.size()) + ": need " +
                      std::to_string(kLengthPrefix + length) + " bytes");
  if ((length - kHeaderBytes) % 8 != 0)
    throw DecodeError("length mismatch at offset 0: payload of " +
                      std::to_string(length - kHeaderBytes) + " bytes is not whole floats");

  Frame f;
  f.tag = static_cast<Tag>(bytes[4]);
  f.party = static_cast<std::uint32_t>(read_le(bytes, 5, 4));
  f.sample = static_cast<std::uint32_t>(read_le(bytes, 9, 4));
  f.seq = static_cast<std::uint32_t>(read_le(bytes, 13, 4));
  f.veclen = static_cast<std::uint16_t>(read_le(bytes, 17, 2));
  const std::size_t floats = (length - kHeaderBytes) / 8;
  f.payload.resize(floats);
  for (std::size_t k = 0; k < floats; ++k)
    f.payload[k] = std::bit_cast<double>(read_le(bytes, kLengthPrefix + kHeaderBytes + 8 * k, 8));
  if (consumed) *consumed = kLengthPrefix + length;
  return f;
}

Frame to_frame(const WireMessage& msg) {
  return std::visit(
      [](const auto& m) -> Frame {
        using T = std::decay_t<decltype(m)>;
        Frame f;
        f.party = m.party;
        f.sample = m.sample;
        f.seq = m.seq;
        if constexpr (std::is_same_v<T, Upload>) {
          if (m.c.size() != m.c_hat.size()) throw ShapeError("upload c and c_hat differ in length");
          f.tag = Tag::kUpload;
          f.veclen = checked_veclen(m.c.size());
          f.payload = m.c;
          f.payload.insert(f.payload.end(), m.c_hat.begin(), m.c_hat.end());
        } else if constexpr (std::is_same_v<T, Reply>) {
          f.tag = Tag::kReply;
          f.veclen = 1;
          f.payload = {m.h, m.h_bar};
        } else if constexpr (std::is_same_v<T, Query>) {
          f.tag = Tag::kQuery;
        } else {
          f.tag = Tag::kRefresh;
          f.veclen = checked_veclen(m.c.size());
          f.payload = m.c;
        }
        return f;
      },
      msg);
}

WireMessage from_frame(const Frame& f) {
  switch (f.tag) {
    case Tag::kUpload: {
      require_shape(f.veclen >= 1 && f.payload.size() == 2u * f.veclen, f, "needs 2*veclen floats");
      Upload u{f.party, f.sample, f.seq, {}, {}};
      u.c.assign(f.payload.begin(), f.payload.begin() + f.veclen);
      u.c_hat.assign(f.payload.begin() + f.veclen, f.payload.end());
      return u;
    }
    case Tag::kReply:
      require_shape(f.veclen == 1 && f.payload.size() == 2, f, "needs h and h_bar");
      return Reply{f.party, f.sample, f.seq, f.payload[0], f.payload[1]};
    case Tag::kQuery:
      require_shape(f.veclen == 0 && f.payload.empty(), f, "carries no payload");
      return Query{f.party, f.sample, f.seq};
    case Tag::kRefresh:
      require_shape(f.veclen >= 1 && f.payload.size() == f.veclen, f, "needs veclen floats");
      return Refresh{f.party, f.sample, f.seq, f.payload};
    default:
      throw DecodeError("unknown tag " + hex(static_cast<std::uint8_t>(f.tag)) + " at offset 4");
  }
}

std::vector<std::uint8_t> encode_message(const WireMessage& msg) {
  return encode_frame(to_frame(msg));
}

WireMessage decode_message(std::span<const std::uint8_t> bytes) {
  std::size_t used = 0;
  const Frame f = decode_frame(bytes, &used);
  if (used != bytes.size())
    throw DecodeError("length mismatch at offset " + std::to_string(used) + ": " +
                      std::to_string(bytes.size() - used) + " trailing bytes");
  return from_frame(f);
}

void Transcript::append(double time, Flow flow, Frame frame) {
  const std::size_t bytes = frame.encoded_size();
  (flow == Flow::kUp ? bytes_up_ : bytes_down_) += bytes;
  ++count_;
  if (keep_) entries_.push_back(TranscriptEntry{time, flow, std::move(frame), bytes});
}

std::size_t Transcript::count(Tag tag) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [tag](const TranscriptEntry& e) { return e.frame.tag == tag; }));
}

void Transcript::write_jsonl(std::ostream& out) const {
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["time"] = e.time;
    j["dir"] = e.flow == Flow::kUp ? "up" : "down";
    j["variant"] = tag_name(e.frame.tag);
    j["party"] = e.frame.party;
    j["sample"] = e.frame.sample;
    j["seq"] = e.frame.seq;
    j["payload"] = e.frame.payload;
    j["bytes"] = e.bytes;
    out << j.dump() << '\n';
  }
}

Transcript Transcript::read_jsonl(std::istream& in) {
  Transcript t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Frame f;
      const auto tag = tag_from_name(j.at("variant").get<std::string>());
      if (!tag) throw ParseError("unknown variant");
      f.tag = *tag;
      f.party = j.at("party").get<std::uint32_t>();
      f.sample = j.at("sample").get<std::uint32_t>();
      f.seq = j.at("seq").get<std::uint32_t>();
      f.payload = j.at("payload").get<Vec>();
      // veclen is implied by the variant's payload shape.
      switch (f.tag) {
        case Tag::kUpload: f.veclen = checked_veclen(f.payload.size() / 2); break;
        case Tag::kReply: f.veclen = 1; break;
        case Tag::kQuery: f.veclen = 0; break;
        case Tag::kTigGradReply: f.veclen = checked_veclen(f.payload.empty() ? 0 : f.payload.size() - 1); break;
        default: f.veclen = checked_veclen(f.payload.size()); break;
      }
      const Flow flow = j.at("dir").get<std::string>() == "up" ? Flow::kUp : Flow::kDown;
      const std::size_t bytes = j.at("bytes").get<std::size_t>();
      if (bytes != f.encoded_size()) throw ParseError("bytes field disagrees with payload size");
      t.append(j.at("time").get<double>(), flow, std::move(f));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("transcript line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("transcript line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return t;
}

AuditResult audit_transcript(const Transcript& transcript, const AuditDims& dims) {
  const auto& entries = transcript.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Frame& f = entries[k].frame;
    const std::size_t len = f.veclen > 0 ? f.veclen : f.payload.size();
    if (len == 0) continue;
    std::string why;
    if (len > dims.max_output_dim) {
      const bool block = std::find(dims.block_dims.begin(), dims.block_dims.end(), len) !=
                         dims.block_dims.end();
      why = "payload vector of length " + std::to_string(len) +
            (block ? " matches a parameter block" : " exceeds the widest local output") + " (" +
            std::to_string(dims.max_output_dim) + ")";
    }
    if (!why.empty())
      return {false, k, "entry " + std::to_string(k) + " (" + std::string(tag_name(f.tag)) +
                            ", party " + std::to_string(f.party) + ", seq " + std::to_string(f.seq) +
                            "): " + why};
  }
  return {};
}

}  // namespace revelight
