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

#include "fairtrace/bytes.hpp"

#include <openssl/evp.h>

#include "fairtrace/errors.hpp"

namespace fairtrace {

Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

std::string to_string(BytesView b) {
  return std::string(b.begin(), b.end());
}

std::string hex_encode(BytesView b) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (std::uint8_t c : b) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0x0f]);
  }
  return out;
}

static int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::optional<Bytes> hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_nibble(hex[i]);
    int lo = hex_nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::string base64_encode(BytesView b) {
  std::string out;
  out.resize(4 * ((b.size() + 2) / 3) + 1);
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          b.data(), static_cast<int>(b.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::optional<Bytes> base64_decode(std::string_view b64) {
  if (b64.size() % 4 != 0) return std::nullopt;
  Bytes out(3 * (b64.size() / 4) + 1);
  int n = EVP_DecodeBlock(out.data(),
                          reinterpret_cast<const unsigned char*>(b64.data()),
                          static_cast<int>(b64.size()));
  if (n < 0) return std::nullopt;
  // EVP_DecodeBlock counts padding bytes as output; strip them.
  std::size_t pad = 0;
  for (auto it = b64.rbegin(); it != b64.rend() && *it == '='; ++it) pad++;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

void append(Bytes& out, BytesView more) {
  out.insert(out.end(), more.begin(), more.end());
}

Bytes concat(std::initializer_list<BytesView> parts) {
  Bytes out;
  for (const auto& p : parts) append(out, p);
  return out;
}

void put_u32_be(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64_be(Bytes& out, std::uint64_t v) {
  put_u32_be(out, static_cast<std::uint32_t>(v >> 32));
  put_u32_be(out, static_cast<std::uint32_t>(v));
}

std::uint8_t FrameReader::u8() {
  if (pos_ + 1 > data_.size()) fail("malformed-frame", "truncated u8");
  return data_[pos_++];
}

std::uint32_t FrameReader::u32() {
  if (pos_ + 4 > data_.size()) fail("malformed-frame", "truncated u32");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; i++) v = (v << 8) | data_[pos_++];
  return v;
}

std::uint64_t FrameReader::u64() {
  std::uint64_t hi = u32();
  return (hi << 32) | u32();
}

Bytes FrameReader::bytes() {
  std::uint32_t len = u32();
  if (pos_ + len > data_.size()) fail("malformed-frame", "truncated field");
  Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
            data_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
  pos_ += len;
  return out;
}

std::string FrameReader::str() {
  Bytes b = bytes();
  return to_string(b);
}

void FrameReader::expect_done() const {
  if (!done()) fail("malformed-frame", "trailing bytes");
}

}  // namespace fairtrace
