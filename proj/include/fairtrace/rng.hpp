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

#ifndef FAIRTRACE_RNG_HPP_
#define FAIRTRACE_RNG_HPP_

#include <cstdint>
#include <deque>

#include "fairtrace/bytes.hpp"

namespace fairtrace {

class Rng {
 public:
  virtual ~Rng() = default;
  virtual void fill(std::uint8_t* out, std::size_t len) = 0;

  Bytes bytes(std::size_t len) {
    Bytes b(len);
    if (len) fill(b.data(), len);
    return b;
  }
};

// OS randomness via RAND_bytes.
class SystemRng final : public Rng {
 public:
  void fill(std::uint8_t* out, std::size_t len) override;
  static SystemRng& instance();
};

// Deterministic SHA-256 counter stream. Seeded runs reproduce byte-exact
// protocol transcripts; used by tests and the transport-equivalence checks.
class DrbgRng final : public Rng {
 public:
  explicit DrbgRng(BytesView seed);
  void fill(std::uint8_t* out, std::size_t len) override;

 private:
  Bytes seed_;
  std::uint64_t counter_ = 0;
  Bytes pool_;
};

// Replays preloaded byte strings in order, one per fill() call; falls back
// to the DRBG once the script is exhausted. Test-only scripting hook.
class ScriptedRng final : public Rng {
 public:
  explicit ScriptedRng(std::deque<Bytes> script) : script_(std::move(script)), tail_(to_bytes("scripted-tail")) {}
  void fill(std::uint8_t* out, std::size_t len) override;

 private:
  std::deque<Bytes> script_;
  DrbgRng tail_;
};

}  // namespace fairtrace

#endif  // FAIRTRACE_RNG_HPP_
