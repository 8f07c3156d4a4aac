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

#include "fairtrace/group.hpp"

#include <openssl/err.h>
#include <openssl/obj_mac.h>
#include <openssl/sha.h>

#include <cassert>
#include <cstring>
#include <stdexcept>

#include "fairtrace/errors.hpp"

namespace fairtrace::group {

namespace {

constexpr std::uint32_t kToyP = 23;
constexpr std::uint32_t kToyQ = 11;
constexpr std::uint32_t kToyG = 2;
constexpr std::uint32_t kToyH = 3;
constexpr std::size_t kEcElemSize = 33;
constexpr std::size_t kEcScalarSize = 32;

const EC_GROUP* p256() {
  static EC_GROUP* grp = [] {
    EC_GROUP* g = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
    if (!g) throw std::runtime_error("P-256 unavailable");
    return g;
  }();
  return grp;
}

BN_CTX* bn_ctx() {
  thread_local BN_CTX* ctx = BN_CTX_new();
  return ctx;
}

const BIGNUM* p256_order() {
  static BIGNUM* q = [] {
    BIGNUM* o = BN_new();
    if (EC_GROUP_get_order(p256(), o, bn_ctx()) != 1)
      throw std::runtime_error("EC_GROUP_get_order failed");
    return o;
  }();
  return q;
}

std::uint32_t toy_modexp(std::uint32_t base, std::uint64_t e) {
  // p fits in 32 bits, so 64-bit products never overflow
  std::uint64_t result = 1, b = base % kToyP;
  while (e > 0) {
    if (e & 1) result = (result * b) % kToyP;
    b = (b * b) % kToyP;
    e >>= 1;
  }
  return static_cast<std::uint32_t>(result);
}

bool toy_in_subgroup(std::uint32_t r) {
  return r >= 1 && r < kToyP && toy_modexp(r, kToyQ) == 1;
}

Bytes sha256_of(BytesView data) {
  Bytes out(SHA256_DIGEST_LENGTH);
  SHA256(data.data(), data.size(), out.data());
  return out;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Ec128:
      return "ec";
    case Backend::ToyModP:
      return "toy";
  }
  return "?";
}

std::optional<Backend> backend_from_name(std::string_view name) {
  if (name == "ec") return Backend::Ec128;
  if (name == "toy") return Backend::ToyModP;
  return std::nullopt;
}

// ---------------------------------------------------------------- Bn

Bn::Bn() : bn_(BN_new()) {}
Bn::Bn(const Bn& other) : bn_(BN_dup(other.bn_)) {}
Bn::Bn(Bn&& other) noexcept : bn_(other.bn_) { other.bn_ = nullptr; }
Bn& Bn::operator=(const Bn& other) {
  if (this != &other) {
    BN_free(bn_);
    bn_ = BN_dup(other.bn_);
  }
  return *this;
}
Bn& Bn::operator=(Bn&& other) noexcept {
  if (this != &other) {
    BN_free(bn_);
    bn_ = other.bn_;
    other.bn_ = nullptr;
  }
  return *this;
}
Bn::~Bn() { BN_free(bn_); }

Bn Bn::from_u64(std::uint64_t v) {
  Bn b;
  BN_set_word(b.bn_, v);
  return b;
}

Bn Bn::from_bytes_be(BytesView b) {
  Bn out;
  BN_bin2bn(b.data(), static_cast<int>(b.size()), out.bn_);
  return out;
}

Bytes Bn::to_bytes_be(std::size_t width) const {
  Bytes out(width);
  if (BN_bn2binpad(bn_, out.data(), static_cast<int>(width)) < 0)
    throw std::runtime_error("scalar wider than encoding width");
  return out;
}

std::uint64_t Bn::to_u64() const {
  return BN_get_word(bn_);
}

bool Bn::is_zero() const { return BN_is_zero(bn_); }

bool Bn::operator==(const Bn& other) const {
  return BN_cmp(bn_, other.bn_) == 0;
}

// ---------------------------------------------------------------- EcElem

EcElem::EcElem() : pt_(EC_POINT_new(p256())) {}
EcElem::EcElem(const EcElem& other) : pt_(EC_POINT_dup(other.pt_, p256())) {}
EcElem::EcElem(EcElem&& other) noexcept : pt_(other.pt_) { other.pt_ = nullptr; }
EcElem& EcElem::operator=(const EcElem& other) {
  if (this != &other) {
    EC_POINT_free(pt_);
    pt_ = EC_POINT_dup(other.pt_, p256());
  }
  return *this;
}
EcElem& EcElem::operator=(EcElem&& other) noexcept {
  if (this != &other) {
    EC_POINT_free(pt_);
    pt_ = other.pt_;
    other.pt_ = nullptr;
  }
  return *this;
}
EcElem::~EcElem() { EC_POINT_free(pt_); }

bool EcElem::operator==(const EcElem& other) const {
  return EC_POINT_cmp(p256(), pt_, other.pt_, bn_ctx()) == 0;
}

// ---------------------------------------------------------------- Group

Group::Group(Backend b, Bn q, GroupElement g, GroupElement h)
    : backend_(b), q_(std::move(q)), g_(std::move(g)), h_(std::move(h)) {}

Group Group::setup(int security_bits, Backend backend) {
  switch (backend) {
    case Backend::ToyModP: {
      return Group(backend, Bn::from_u64(kToyQ), GroupElement(ToyElem{kToyG}),
                   GroupElement(ToyElem{kToyH}));
    }
    case Backend::Ec128: {
      if (security_bits != 128)
        fail("unsupported-backend",
             "ec backend supports security level 128 only");
      EcElem g(EC_POINT_dup(EC_GROUP_get0_generator(p256()), p256()));
      Group partial(backend, Bn(BN_dup(p256_order())), GroupElement(g),
                    GroupElement(g));
      // h = H1 of a fixed seed: subgroup member with unknown dlog wrt g
      partial.h_ = partial.hash_to_group(to_bytes("fairtrace-generator-h"));
      return partial;
    }
  }
  fail("unsupported-backend", "unknown backend id");
}

std::size_t Group::element_size() const {
  return backend_ == Backend::Ec128 ? kEcElemSize : 1;
}

std::size_t Group::scalar_size() const {
  return backend_ == Backend::Ec128 ? kEcScalarSize : 1;
}

Bytes Group::p_bytes() const {
  if (backend_ == Backend::Ec128) return to_bytes("P-256");
  return Bytes{static_cast<std::uint8_t>(kToyP)};
}

GroupElement Group::identity() const {
  if (backend_ == Backend::ToyModP) return GroupElement(ToyElem{1});
  EcElem e;
  EC_POINT_set_to_infinity(p256(), e.get());
  return GroupElement(std::move(e));
}

bool Group::is_identity(const GroupElement& e) const {
  if (const auto* t = std::get_if<ToyElem>(&e.rep_)) return t->residue == 1;
  return EC_POINT_is_at_infinity(p256(), std::get<EcElem>(e.rep_).get()) == 1;
}

Scalar Group::scalar_zero() const { return Scalar(Bn::from_u64(0)); }
Scalar Group::scalar_one() const { return Scalar(Bn::from_u64(1)); }

Scalar Group::scalar_from_u64(std::uint64_t v) const {
  Bn b = Bn::from_u64(v);
  Bn r;
  BN_mod(r.get(), b.get(), q_.get(), bn_ctx());
  return Scalar(std::move(r));
}

Scalar Group::scalar_from_bytes_reduced(BytesView b) const {
  Bn v = Bn::from_bytes_be(b);
  Bn r;
  BN_mod(r.get(), v.get(), q_.get(), bn_ctx());
  return Scalar(std::move(r));
}

Bytes Group::encode_scalar(const Scalar& s) const {
  return s.bn().to_bytes_be(scalar_size());
}

std::optional<Scalar> Group::try_decode_scalar(BytesView b) const {
  if (b.size() != scalar_size()) return std::nullopt;
  Bn v = Bn::from_bytes_be(b);
  if (BN_cmp(v.get(), q_.get()) >= 0) return std::nullopt;
  return Scalar(std::move(v));
}

Scalar Group::decode_scalar(BytesView b) const {
  auto s = try_decode_scalar(b);
  if (!s) fail("malformed-encoding", "bad scalar encoding");
  return *s;
}

Scalar Group::random_scalar(Rng& rng) const {
  // rejection sampling keeps the draw uniform and script-friendly
  for (;;) {
    Bytes b = rng.bytes(scalar_size());
    Bn v = Bn::from_bytes_be(b);
    if (BN_cmp(v.get(), q_.get()) < 0) return Scalar(std::move(v));
  }
}

Scalar Group::random_scalar_nonzero(Rng& rng) const {
  for (;;) {
    Scalar s = random_scalar(rng);
    if (!s.is_zero()) return s;
  }
}

Scalar Group::sc_add(const Scalar& a, const Scalar& b) const {
  Bn r;
  BN_mod_add(r.get(), a.bn().get(), b.bn().get(), q_.get(), bn_ctx());
  return Scalar(std::move(r));
}

Scalar Group::sc_sub(const Scalar& a, const Scalar& b) const {
  Bn r;
  BN_mod_sub(r.get(), a.bn().get(), b.bn().get(), q_.get(), bn_ctx());
  return Scalar(std::move(r));
}

Scalar Group::sc_mul(const Scalar& a, const Scalar& b) const {
  Bn r;
  BN_mod_mul(r.get(), a.bn().get(), b.bn().get(), q_.get(), bn_ctx());
  return Scalar(std::move(r));
}

Scalar Group::sc_neg(const Scalar& a) const {
  return sc_sub(scalar_zero(), a);
}

Scalar Group::sc_inv(const Scalar& a) const {
  if (a.is_zero()) fail("zero-scalar", "scalar has no inverse");
  Bn r;
  if (!BN_mod_inverse(r.get(), a.bn().get(), q_.get(), bn_ctx()))
    fail("zero-scalar", "scalar has no inverse");
  return Scalar(std::move(r));
}

GroupElement Group::exp(const GroupElement& base, const Scalar& e) const {
  if (const auto* t = std::get_if<ToyElem>(&base.rep_)) {
    return GroupElement(ToyElem{toy_modexp(t->residue, e.bn().to_u64())});
  }
  EcElem r;
  const EcElem& b = std::get<EcElem>(base.rep_);
  int ok;
  if (b == std::get<EcElem>(g_.rep_)) {
    ok = EC_POINT_mul(p256(), r.get(), e.bn().get(), nullptr, nullptr, bn_ctx());
  } else {
    ok = EC_POINT_mul(p256(), r.get(), nullptr, b.get(), e.bn().get(), bn_ctx());
  }
  if (ok != 1) throw std::runtime_error("EC_POINT_mul failed");
  return GroupElement(std::move(r));
}

GroupElement Group::mul(const GroupElement& a, const GroupElement& b) const {
  if (const auto* ta = std::get_if<ToyElem>(&a.rep_)) {
    const auto& tb = std::get<ToyElem>(b.rep_);
    return GroupElement(
        ToyElem{static_cast<std::uint32_t>((static_cast<std::uint64_t>(ta->residue) * tb.residue) % kToyP)});
  }
  EcElem r;
  if (EC_POINT_add(p256(), r.get(), std::get<EcElem>(a.rep_).get(),
                   std::get<EcElem>(b.rep_).get(), bn_ctx()) != 1)
    throw std::runtime_error("EC_POINT_add failed");
  return GroupElement(std::move(r));
}

GroupElement Group::inv(const GroupElement& a) const {
  if (const auto* t = std::get_if<ToyElem>(&a.rep_)) {
    // a^(p-2) mod p
    return GroupElement(ToyElem{toy_modexp(t->residue, kToyP - 2)});
  }
  EcElem r(EC_POINT_dup(std::get<EcElem>(a.rep_).get(), p256()));
  if (EC_POINT_invert(p256(), r.get(), bn_ctx()) != 1)
    throw std::runtime_error("EC_POINT_invert failed");
  return GroupElement(std::move(r));
}

GroupElement Group::div(const GroupElement& a, const GroupElement& b) const {
  return mul(a, inv(b));
}

GroupElement Group::random_element(Rng& rng) const {
  return exp(g_, random_scalar(rng));
}

Bytes Group::encode(const GroupElement& e) const {
  if (const auto* t = std::get_if<ToyElem>(&e.rep_)) {
    return Bytes{static_cast<std::uint8_t>(t->residue)};
  }
  const EcElem& p = std::get<EcElem>(e.rep_);
  if (EC_POINT_is_at_infinity(p256(), p.get())) {
    return Bytes(kEcElemSize, 0x00);  // canonical identity encoding
  }
  Bytes out(kEcElemSize);
  std::size_t n = EC_POINT_point2oct(p256(), p.get(), POINT_CONVERSION_COMPRESSED,
                                     out.data(), out.size(), bn_ctx());
  if (n != kEcElemSize) throw std::runtime_error("point2oct failed");
  return out;
}

std::optional<GroupElement> Group::try_decode(BytesView b) const {
  try {
    return decode(b);
  } catch (const Error&) {
    return std::nullopt;
  }
}

GroupElement Group::decode(BytesView b) const {
  if (backend_ == Backend::ToyModP) {
    if (b.size() != 1) fail("malformed-encoding", "toy element is 1 byte");
    std::uint32_t r = b[0];
    if (r == 0 || r >= kToyP) fail("malformed-encoding", "residue out of range");
    if (!toy_in_subgroup(r)) fail("not-in-subgroup", "residue has wrong order");
    return GroupElement(ToyElem{r});
  }
  if (b.size() != kEcElemSize) fail("malformed-encoding", "point is 33 bytes");
  bool all_zero = true;
  for (std::uint8_t c : b)
    if (c != 0) {
      all_zero = false;
      break;
    }
  if (all_zero) return identity();
  if (b[0] != 0x02 && b[0] != 0x03)
    fail("malformed-encoding", "bad compression tag");
  EcElem p;
  if (EC_POINT_oct2point(p256(), p.get(), b.data(), b.size(), bn_ctx()) != 1) {
    ERR_clear_error();
    // prime-order curve: off-curve x is the only way to miss the subgroup
    fail("not-in-subgroup", "x-coordinate not on curve");
  }
  return GroupElement(std::move(p));
}

GroupElement Group::hash_to_group(BytesView data) const {
  Bytes material = to_bytes("H1");
  append(material, data);
  std::size_t base = material.size();
  material.resize(base + 4);
  for (std::uint32_t ctr = 0;; ctr++) {
    material[base] = static_cast<std::uint8_t>(ctr >> 24);
    material[base + 1] = static_cast<std::uint8_t>(ctr >> 16);
    material[base + 2] = static_cast<std::uint8_t>(ctr >> 8);
    material[base + 3] = static_cast<std::uint8_t>(ctr);
    Bytes digest = sha256_of(material);
    if (backend_ == Backend::ToyModP) {
      Bn v = Bn::from_bytes_be(digest);
      Bn r;
      BN_mod(r.get(), v.get(), Bn::from_u64(kToyP).get(), bn_ctx());
      auto residue = static_cast<std::uint32_t>(r.to_u64());
      if (residue > 1 && toy_in_subgroup(residue))
        return GroupElement(ToyElem{residue});
    } else {
      Bytes cand(kEcElemSize);
      cand[0] = 0x02;
      std::memcpy(cand.data() + 1, digest.data(), 32);
      EcElem p;
      if (EC_POINT_oct2point(p256(), p.get(), cand.data(), cand.size(),
                             bn_ctx()) == 1)
        return GroupElement(std::move(p));
      ERR_clear_error();
    }
  }
}

Scalar Group::hash_to_scalar(BytesView tag, const std::vector<Bytes>& parts) const {
  if (parts.empty()) throw std::invalid_argument("hash_to_scalar: empty parts");
  Bytes material(tag.begin(), tag.end());
  bool first = true;
  for (const auto& p : parts) {
    if (!first) material.push_back(0x7C);
    first = false;
    append(material, p);
  }
  return scalar_from_bytes_reduced(sha256_of(material));
}

}  // namespace fairtrace::group
