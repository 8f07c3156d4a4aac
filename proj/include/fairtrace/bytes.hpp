// Copyright 2026 The Fairtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRTRACE_BYTES_HPP_
#define FAIRTRACE_BYTES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairtrace {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view s);
std::string to_string(BytesView b);

std::string hex_encode(BytesView b);
std::optional<Bytes> hex_decode(std::string_view hex);

std::string base64_encode(BytesView b);
std::optional<Bytes> base64_decode(std::string_view b64);

void append(Bytes& out, BytesView more);
Bytes concat(std::initializer_list<BytesView> parts);

void put_u32_be(Bytes& out, std::uint32_t v);
void put_u64_be(Bytes& out, std::uint64_t v);

// Canonical frame layout used for everything that must be bit-exact:
// transaction bodies, blocks, deployment bundles, contract state, contract
// requests/responses, issuance messages. Fields are written in declared
// order, each byte-string field prefixed with a u32 big-endian length.
class FrameWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { put_u32_be(buf_, v); }
  void u64(std::uint64_t v) { put_u64_be(buf_, v); }
  void bytes(BytesView b) {
    u32(static_cast<std::uint32_t>(b.size()));
    append(buf_, b);
  }
  void str(std::string_view s) { bytes(to_bytes(s)); }

  const Bytes& out() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Throws Error("malformed-frame") on truncated or oversized reads.
class FrameReader {
 public:
  explicit FrameReader(BytesView b) : data_(b) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  Bytes bytes();
  std::string str();
  bool done() const { return pos_ == data_.size(); }
  void expect_done() const;

 private:
  BytesView data_;
  std::size_t pos_ = 0;
};

}  // namespace fairtrace

#endif  // FAIRTRACE_BYTES_HPP_
