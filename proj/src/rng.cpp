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

#include "fairtrace/rng.hpp"

#include <openssl/rand.h>
#include <openssl/sha.h>

#include <cstring>
#include <stdexcept>

namespace fairtrace {

void SystemRng::fill(std::uint8_t* out, std::size_t len) {
  if (len == 0) return;
  if (RAND_bytes(out, static_cast<int>(len)) != 1)
    throw std::runtime_error("RAND_bytes failed");
}

SystemRng& SystemRng::instance() {
  static SystemRng rng;
  return rng;
}

DrbgRng::DrbgRng(BytesView seed) : seed_(seed.begin(), seed.end()) {}

void DrbgRng::fill(std::uint8_t* out, std::size_t len) {
  while (len > 0) {
    if (pool_.empty()) {
      Bytes block = seed_;
      put_u64_be(block, counter_++);
      pool_.resize(SHA256_DIGEST_LENGTH);
      SHA256(block.data(), block.size(), pool_.data());
    }
    std::size_t take = std::min(len, pool_.size());
    std::memcpy(out, pool_.data(), take);
    pool_.erase(pool_.begin(), pool_.begin() + static_cast<std::ptrdiff_t>(take));
    out += take;
    len -= take;
  }
}

void ScriptedRng::fill(std::uint8_t* out, std::size_t len) {
  if (script_.empty()) {
    tail_.fill(out, len);
    return;
  }
  Bytes next = std::move(script_.front());
  script_.pop_front();
  if (next.size() != len)
    throw std::runtime_error("scripted rng length mismatch");
  std::memcpy(out, next.data(), len);
}

}  // namespace fairtrace
