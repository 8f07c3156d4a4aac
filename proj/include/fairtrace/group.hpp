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

#ifndef FAIRTRACE_GROUP_HPP_
#define FAIRTRACE_GROUP_HPP_

#include <openssl/bn.h>
#include <openssl/ec.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fairtrace/bytes.hpp"
#include "fairtrace/rng.hpp"

namespace fairtrace::group {

enum class Backend : std::uint8_t {
  Ec128 = 1,   // P-256, 33-byte compressed points, 32-byte scalars
  ToyModP = 2  // order-11 subgroup of Z_23^*, 1-byte residues and scalars
};

const char* backend_name(Backend b);
std::optional<Backend> backend_from_name(std::string_view name);

// Owning BIGNUM with value semantics.
class Bn {
 public:
  Bn();
  explicit Bn(BIGNUM* owned) : bn_(owned) {}
  Bn(const Bn& other);
  Bn(Bn&& other) noexcept;
  Bn& operator=(const Bn& other);
  Bn& operator=(Bn&& other) noexcept;
  ~Bn();

  BIGNUM* get() { return bn_; }
  const BIGNUM* get() const { return bn_; }

  static Bn from_u64(std::uint64_t v);
  static Bn from_bytes_be(BytesView b);
  Bytes to_bytes_be(std::size_t width) const;
  std::uint64_t to_u64() const;
  bool is_zero() const;
  bool operator==(const Bn& other) const;

 private:
  BIGNUM* bn_;
};

// Scalar in [0, q). All arithmetic goes through Group so reduction mod the
// right order is unavoidable.
class Scalar {
 public:
  Scalar() : v_(Bn::from_u64(0)) {}  // placeholder before assignment

  const Bn& bn() const { return v_; }
  bool is_zero() const { return v_.is_zero(); }
  bool operator==(const Scalar& other) const { return v_ == other.v_; }
  bool operator!=(const Scalar& other) const { return !(*this == other); }

 private:
  friend class Group;
  explicit Scalar(Bn v) : v_(std::move(v)) {}
  Bn v_;
};

struct ToyElem {
  std::uint32_t residue = 0;
  bool operator==(const ToyElem&) const = default;
};

// Affine P-256 point behind a value-semantic wrapper. Copies duplicate the
// underlying EC_POINT against the process-wide curve group.
class EcElem {
 public:
  EcElem();
  explicit EcElem(EC_POINT* owned) : pt_(owned) {}
  EcElem(const EcElem& other);
  EcElem(EcElem&& other) noexcept;
  EcElem& operator=(const EcElem& other);
  EcElem& operator=(EcElem&& other) noexcept;
  ~EcElem();

  EC_POINT* get() { return pt_; }
  const EC_POINT* get() const { return pt_; }
  bool operator==(const EcElem& other) const;

 private:
  EC_POINT* pt_;
};

class GroupElement {
 public:
  GroupElement() = default;  // placeholder before assignment

  bool operator==(const GroupElement& other) const { return rep_ == other.rep_; }
  bool operator!=(const GroupElement& other) const { return !(*this == other); }

 private:
  friend class Group;
  explicit GroupElement(ToyElem e) : rep_(e) {}
  explicit GroupElement(EcElem e) : rep_(std::move(e)) {}
  std::variant<ToyElem, EcElem> rep_;
};

// Prime-order group with two generators g, h and the domain hash functions.
// Immutable after setup(); every operation is pure, so instances are safe to
// share across threads.
class Group {
 public:
  // security_bits must be 128 for the EC backend; the toy backend ignores it.
  static Group setup(int security_bits, Backend backend);

  Backend backend() const { return backend_; }
  std::size_t element_size() const;  // canonical encoding width
  std::size_t scalar_size() const;

  const Bn& order() const { return q_; }
  // Field/curve identifier bytes ("p" in the parameter tuple): the curve
  // name for EC, the big-endian modulus for toy.
  Bytes p_bytes() const;
  Bytes q_bytes() const { return q_.to_bytes_be(scalar_size()); }

  const GroupElement& generator() const { return g_; }
  const GroupElement& second_generator() const { return h_; }
  GroupElement identity() const;
  bool is_identity(const GroupElement& e) const;

  // Scalars
  Scalar scalar_zero() const;
  Scalar scalar_one() const;
  Scalar scalar_from_u64(std::uint64_t v) const;  // reduced mod q
  Scalar scalar_from_bytes_reduced(BytesView b) const;
  Bytes encode_scalar(const Scalar& s) const;
  std::optional<Scalar> try_decode_scalar(BytesView b) const;
  Scalar decode_scalar(BytesView b) const;  // throws malformed-encoding
  Scalar random_scalar(Rng& rng) const;
  Scalar random_scalar_nonzero(Rng& rng) const;
  Scalar sc_add(const Scalar& a, const Scalar& b) const;
  Scalar sc_sub(const Scalar& a, const Scalar& b) const;
  Scalar sc_mul(const Scalar& a, const Scalar& b) const;
  Scalar sc_neg(const Scalar& a) const;
  Scalar sc_inv(const Scalar& a) const;  // throws zero-scalar

  // Elements
  GroupElement exp(const GroupElement& base, const Scalar& e) const;
  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  GroupElement div(const GroupElement& a, const GroupElement& b) const;
  GroupElement inv(const GroupElement& a) const;
  GroupElement random_element(Rng& rng) const;  // g^r for fresh random r

  Bytes encode(const GroupElement& e) const;
  GroupElement decode(BytesView b) const;  // throws malformed-encoding / not-in-subgroup
  std::optional<GroupElement> try_decode(BytesView b) const;

  // H1: arbitrary bytes -> non-identity subgroup element. Counter-appended
  // hash-then-decode with rejection sampling, domain tag "H1".
  GroupElement hash_to_group(BytesView data) const;

  // H2-family: SHA-256 over (tag ‖ parts joined by 0x7C), big-endian,
  // reduced mod q. parts must be non-empty.
  Scalar hash_to_scalar(BytesView tag, const std::vector<Bytes>& parts) const;

 private:
  Group(Backend b, Bn q, GroupElement g, GroupElement h);

  Backend backend_;
  Bn q_;
  GroupElement g_;
  GroupElement h_;
};

}  // namespace fairtrace::group

#endif  // FAIRTRACE_GROUP_HPP_
