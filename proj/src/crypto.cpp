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

#include "fairtrace/crypto.hpp"

#include <openssl/err.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <cstring>
#include <stdexcept>

#include "fairtrace/errors.hpp"

namespace fairtrace::crypto {

namespace {

[[noreturn]] void ssl_bug(const char* what) {
  ERR_clear_error();
  throw std::runtime_error(std::string("openssl failure: ") + what);
}

EVP_PKEY* raw_private_key(int type, BytesView seed) {
  if (seed.size() != kSeedSize) fail("malformed-encoding", "key seed is 32 bytes");
  EVP_PKEY* key =
      EVP_PKEY_new_raw_private_key(type, nullptr, seed.data(), seed.size());
  if (!key) ssl_bug("new_raw_private_key");
  return key;
}

Bytes raw_public_key(const EVP_PKEY* key) {
  std::size_t len = kSigPublicSize;
  Bytes out(len);
  if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1 || len != out.size())
    ssl_bug("get_raw_public_key");
  return out;
}

Bytes raw_private_seed(const EVP_PKEY* key) {
  std::size_t len = kSeedSize;
  Bytes out(len);
  if (EVP_PKEY_get_raw_private_key(key, out.data(), &len) != 1 ||
      len != out.size())
    ssl_bug("get_raw_private_key");
  return out;
}

Bytes x25519_shared(EVP_PKEY* mine, BytesView peer_public) {
  EVP_PKEY* peer = EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr,
                                               peer_public.data(),
                                               peer_public.size());
  if (!peer) ssl_bug("peer public key");
  EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new(mine, nullptr);
  Bytes shared(32);
  std::size_t len = shared.size();
  bool ok = ctx && EVP_PKEY_derive_init(ctx) == 1 &&
            EVP_PKEY_derive_set_peer(ctx, peer) == 1 &&
            EVP_PKEY_derive(ctx, shared.data(), &len) == 1 && len == 32;
  EVP_PKEY_CTX_free(ctx);
  EVP_PKEY_free(peer);
  if (!ok) ssl_bug("x25519 derive");
  return shared;
}

Bytes hybrid_key(BytesView shared, BytesView ephemeral_public,
                 BytesView recipient_public, BytesView info) {
  Bytes salt = concat({ephemeral_public, recipient_public});
  return hkdf32(shared, salt, info);
}

}  // namespace

Bytes sha256(BytesView data) {
  Bytes out(kHashSize);
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Bytes hmac_sha256(BytesView key, BytesView data) {
  Bytes out(kHashSize);
  unsigned int len = kHashSize;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(),
            data.size(), out.data(), &len) ||
      len != kHashSize)
    ssl_bug("hmac");
  return out;
}

Bytes hkdf32(BytesView ikm, BytesView salt, BytesView info) {
  Bytes prk = hmac_sha256(salt, ikm);
  Bytes block(info.begin(), info.end());
  block.push_back(0x01);
  return hmac_sha256(prk, block);
}

Bytes aead_seal(BytesView key, BytesView nonce, BytesView aad, BytesView pt) {
  if (key.size() != kAeadKeySize || nonce.size() != kAeadNonceSize)
    fail("malformed-encoding", "bad aead key or nonce size");
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  Bytes out(pt.size() + kAeadTagSize);
  int len = 0;
  int total = 0;
  bool ok = ctx &&
            EVP_EncryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(),
                               nonce.data()) == 1;
  if (ok && !aad.empty())
    ok = EVP_EncryptUpdate(ctx, nullptr, &len, aad.data(),
                           static_cast<int>(aad.size())) == 1;
  if (ok && !pt.empty()) {
    ok = EVP_EncryptUpdate(ctx, out.data(), &len, pt.data(),
                           static_cast<int>(pt.size())) == 1;
    total = len;
  }
  ok = ok && EVP_EncryptFinal_ex(ctx, out.data() + total, &len) == 1;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, kAeadTagSize,
                                 out.data() + pt.size()) == 1;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) ssl_bug("aead seal");
  return out;
}

std::optional<Bytes> aead_open(BytesView key, BytesView nonce, BytesView aad,
                               BytesView ct) {
  if (key.size() != kAeadKeySize || nonce.size() != kAeadNonceSize ||
      ct.size() < kAeadTagSize)
    return std::nullopt;
  std::size_t body = ct.size() - kAeadTagSize;
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  Bytes out(body);
  int len = 0;
  bool ok = ctx &&
            EVP_DecryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(),
                               nonce.data()) == 1;
  if (ok && !aad.empty())
    ok = EVP_DecryptUpdate(ctx, nullptr, &len, aad.data(),
                           static_cast<int>(aad.size())) == 1;
  if (ok && body > 0)
    ok = EVP_DecryptUpdate(ctx, out.data(), &len, ct.data(),
                           static_cast<int>(body)) == 1;
  Bytes tag(ct.begin() + static_cast<std::ptrdiff_t>(body), ct.end());
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, kAeadTagSize,
                                 tag.data()) == 1;
  int fin = 0;
  ok = ok && EVP_DecryptFinal_ex(ctx, out.data() + len, &fin) == 1;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) {
    ERR_clear_error();
    return std::nullopt;
  }
  return out;
}

// ------------------------------------------------------------ SigningKey

SigningKey::SigningKey(const SigningKey& other) : key_(other.key_) {
  EVP_PKEY_up_ref(key_);
}
SigningKey::SigningKey(SigningKey&& other) noexcept : key_(other.key_) {
  other.key_ = nullptr;
}
SigningKey& SigningKey::operator=(const SigningKey& other) {
  if (this != &other) {
    EVP_PKEY_free(key_);
    key_ = other.key_;
    EVP_PKEY_up_ref(key_);
  }
  return *this;
}
SigningKey& SigningKey::operator=(SigningKey&& other) noexcept {
  if (this != &other) {
    EVP_PKEY_free(key_);
    key_ = other.key_;
    other.key_ = nullptr;
  }
  return *this;
}
SigningKey::~SigningKey() { EVP_PKEY_free(key_); }

SigningKey SigningKey::generate(Rng& rng) {
  return from_seed(rng.bytes(kSeedSize));
}

SigningKey SigningKey::from_seed(BytesView seed) {
  return SigningKey(raw_private_key(EVP_PKEY_ED25519, seed));
}

Bytes SigningKey::public_key() const { return raw_public_key(key_); }

Bytes SigningKey::private_seed() const { return raw_private_seed(key_); }

Bytes SigningKey::sign(BytesView msg) const {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  Bytes sig(kSignatureSize);
  std::size_t len = sig.size();
  bool ok = ctx && EVP_DigestSignInit(ctx, nullptr, nullptr, nullptr, key_) == 1 &&
            EVP_DigestSign(ctx, sig.data(), &len, msg.data(), msg.size()) == 1 &&
            len == kSignatureSize;
  EVP_MD_CTX_free(ctx);
  if (!ok) ssl_bug("ed25519 sign");
  return sig;
}

bool verify_signature(BytesView public_key, BytesView msg, BytesView sig) {
  if (public_key.size() != kSigPublicSize || sig.size() != kSignatureSize)
    return false;
  EVP_PKEY* key = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                              public_key.data(),
                                              public_key.size());
  if (!key) {
    ERR_clear_error();
    return false;
  }
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  bool ok = ctx && EVP_DigestVerifyInit(ctx, nullptr, nullptr, nullptr, key) == 1 &&
            EVP_DigestVerify(ctx, sig.data(), sig.size(), msg.data(),
                             msg.size()) == 1;
  EVP_MD_CTX_free(ctx);
  EVP_PKEY_free(key);
  if (!ok) ERR_clear_error();
  return ok;
}

// ------------------------------------------------------------ BoxKey

BoxKey::BoxKey(const BoxKey& other) : key_(other.key_) { EVP_PKEY_up_ref(key_); }
BoxKey::BoxKey(BoxKey&& other) noexcept : key_(other.key_) {
  other.key_ = nullptr;
}
BoxKey& BoxKey::operator=(const BoxKey& other) {
  if (this != &other) {
    EVP_PKEY_free(key_);
    key_ = other.key_;
    EVP_PKEY_up_ref(key_);
  }
  return *this;
}
BoxKey& BoxKey::operator=(BoxKey&& other) noexcept {
  if (this != &other) {
    EVP_PKEY_free(key_);
    key_ = other.key_;
    other.key_ = nullptr;
  }
  return *this;
}
BoxKey::~BoxKey() { EVP_PKEY_free(key_); }

BoxKey BoxKey::generate(Rng& rng) { return from_seed(rng.bytes(kSeedSize)); }

BoxKey BoxKey::from_seed(BytesView seed) {
  return BoxKey(raw_private_key(EVP_PKEY_X25519, seed));
}

Bytes BoxKey::public_key() const { return raw_public_key(key_); }

Bytes BoxKey::private_seed() const { return raw_private_seed(key_); }

Bytes BoxKey::exchange(BytesView peer_public) const {
  return x25519_shared(key_, peer_public);
}

std::optional<Bytes> BoxKey::open(BytesView ct, BytesView info) const {
  if (ct.size() < kBoxPublicSize + kAeadNonceSize + kAeadTagSize)
    return std::nullopt;
  BytesView epub = ct.subspan(0, kBoxPublicSize);
  BytesView nonce = ct.subspan(kBoxPublicSize, kAeadNonceSize);
  BytesView body = ct.subspan(kBoxPublicSize + kAeadNonceSize);
  Bytes shared;
  try {
    shared = x25519_shared(key_, epub);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  Bytes key = hybrid_key(shared, epub, public_key(), info);
  return aead_open(key, nonce, info, body);
}

Bytes box_seal(BytesView recipient_public, BytesView pt, BytesView info,
               Rng& rng) {
  BoxKey ephemeral = BoxKey::generate(rng);
  Bytes epub = ephemeral.public_key();
  Bytes shared = x25519_shared(ephemeral.key_, recipient_public);
  Bytes key = hybrid_key(shared, epub,
                         Bytes(recipient_public.begin(), recipient_public.end()),
                         info);
  Bytes nonce = rng.bytes(kAeadNonceSize);
  Bytes out = std::move(epub);
  append(out, nonce);
  append(out, aead_seal(key, nonce, info, pt));
  return out;
}

}  // namespace fairtrace::crypto
