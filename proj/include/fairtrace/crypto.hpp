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

#ifndef FAIRTRACE_CRYPTO_HPP_
#define FAIRTRACE_CRYPTO_HPP_

#include <openssl/evp.h>

#include <optional>

#include "fairtrace/bytes.hpp"
#include "fairtrace/rng.hpp"

// Symmetric and signature primitives for the platform simulation: SHA-256,
// HKDF, AES-256-GCM, Ed25519 signatures, X25519 hybrid encryption.

namespace fairtrace::crypto {

inline constexpr std::size_t kHashSize = 32;
inline constexpr std::size_t kAeadKeySize = 32;
inline constexpr std::size_t kAeadNonceSize = 12;
inline constexpr std::size_t kAeadTagSize = 16;
inline constexpr std::size_t kSeedSize = 32;
inline constexpr std::size_t kSigPublicSize = 32;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kBoxPublicSize = 32;

Bytes sha256(BytesView data);
Bytes hmac_sha256(BytesView key, BytesView data);
// HKDF-SHA256, single 32-byte output block.
Bytes hkdf32(BytesView ikm, BytesView salt, BytesView info);

// AES-256-GCM. Sealed layout: ciphertext || 16-byte tag.
Bytes aead_seal(BytesView key, BytesView nonce, BytesView aad, BytesView pt);
std::optional<Bytes> aead_open(BytesView key, BytesView nonce, BytesView aad,
                               BytesView ct);

// Ed25519 signing key, reproducible from a 32-byte seed.
class SigningKey {
 public:
  SigningKey(const SigningKey& other);
  SigningKey(SigningKey&& other) noexcept;
  SigningKey& operator=(const SigningKey& other);
  SigningKey& operator=(SigningKey&& other) noexcept;
  ~SigningKey();

  static SigningKey generate(Rng& rng);
  static SigningKey from_seed(BytesView seed);
  Bytes public_key() const;
  Bytes private_seed() const;
  Bytes sign(BytesView msg) const;

 private:
  explicit SigningKey(EVP_PKEY* owned) : key_(owned) {}
  EVP_PKEY* key_;
};

bool verify_signature(BytesView public_key, BytesView msg, BytesView sig);

// X25519 decryption key for the hybrid scheme below.
class BoxKey {
 public:
  BoxKey(const BoxKey& other);
  BoxKey(BoxKey&& other) noexcept;
  BoxKey& operator=(const BoxKey& other);
  BoxKey& operator=(BoxKey&& other) noexcept;
  ~BoxKey();

  static BoxKey generate(Rng& rng);
  static BoxKey from_seed(BytesView seed);
  Bytes public_key() const;
  Bytes private_seed() const;
  // Raw Diffie-Hellman agreement with a peer public key.
  Bytes exchange(BytesView peer_public) const;
  // Inverse of box_seal; nullopt on any authentication failure.
  std::optional<Bytes> open(BytesView ct, BytesView info) const;

 private:
  friend Bytes box_seal(BytesView recipient_public, BytesView pt,
                        BytesView info, Rng& rng);
  explicit BoxKey(EVP_PKEY* owned) : key_(owned) {}
  EVP_PKEY* key_;
};

// Hybrid public-key encryption: fresh X25519 share, HKDF key derivation
// bound to both public shares and the info string, then AES-256-GCM.
// Layout: ephemeral public (32) || nonce (12) || ciphertext || tag.
Bytes box_seal(BytesView recipient_public, BytesView pt, BytesView info,
               Rng& rng);

}  // namespace fairtrace::crypto

#endif  // FAIRTRACE_CRYPTO_HPP_
