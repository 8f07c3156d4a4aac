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

#include "fairtrace/sigma.hpp"

#include <algorithm>

#include "fairtrace/errors.hpp"

namespace fairtrace::sigma {

DlogProof prove_dlog(const Group& g, const GroupElement& base,
                     const Scalar& secret, BytesView tag, Rng& rng) {
  if (secret.is_zero()) fail("zero-secret", "dlog witness must be nonzero");
  Scalar k = g.random_scalar(rng);
  GroupElement a = g.exp(base, k);
  Scalar c = g.hash_to_scalar(
      tag, {g.encode(base), g.encode(g.exp(base, secret)), g.encode(a)});
  Scalar r = g.sc_sub(k, g.sc_mul(c, secret));
  return DlogProof{std::move(a), std::move(c), std::move(r),
                   Bytes(tag.begin(), tag.end())};
}

bool verify_dlog(const Group& g, const GroupElement& base,
                 const GroupElement& y, const DlogProof& proof, BytesView tag) {
  if (!std::equal(proof.statement_tag.begin(), proof.statement_tag.end(),
                  tag.begin(), tag.end()))
    return false;
  Scalar c = g.hash_to_scalar(
      tag, {g.encode(base), g.encode(y), g.encode(proof.commitment)});
  if (c != proof.challenge) return false;
  return g.mul(g.exp(base, proof.response), g.exp(y, proof.challenge)) ==
         proof.commitment;
}

DlogEqProof prove_dlog_eq(const Group& g, const GroupElement& b1,
                          const GroupElement& b2, const Scalar& secret,
                          BytesView tag, Rng& rng) {
  if (secret.is_zero()) fail("zero-secret", "dleq witness must be nonzero");
  Scalar k = g.random_scalar(rng);
  GroupElement a1 = g.exp(b1, k);
  GroupElement a2 = g.exp(b2, k);
  Scalar c = g.hash_to_scalar(
      tag, {g.encode(b1), g.encode(g.exp(b1, secret)), g.encode(b2),
            g.encode(g.exp(b2, secret)), g.encode(a1), g.encode(a2)});
  Scalar r = g.sc_sub(k, g.sc_mul(c, secret));
  return DlogEqProof{std::move(a1), std::move(a2), std::move(c), std::move(r),
                     Bytes(tag.begin(), tag.end())};
}

bool verify_dlog_eq(const Group& g, const GroupElement& b1,
                    const GroupElement& y1, const GroupElement& b2,
                    const GroupElement& y2, const DlogEqProof& proof,
                    BytesView tag) {
  if (!std::equal(proof.statement_tag.begin(), proof.statement_tag.end(),
                  tag.begin(), tag.end()))
    return false;
  Scalar c = g.hash_to_scalar(
      tag, {g.encode(b1), g.encode(y1), g.encode(b2), g.encode(y2),
            g.encode(proof.commitment1), g.encode(proof.commitment2)});
  if (c != proof.challenge) return false;
  if (g.mul(g.exp(b1, proof.response), g.exp(y1, proof.challenge)) !=
      proof.commitment1)
    return false;
  return g.mul(g.exp(b2, proof.response), g.exp(y2, proof.challenge)) ==
         proof.commitment2;
}

Bytes encode_dlog_proof(const Group& g, const DlogProof& p) {
  Bytes out = g.encode(p.commitment);
  append(out, g.encode_scalar(p.challenge));
  append(out, g.encode_scalar(p.response));
  append(out, p.statement_tag);
  return out;
}

std::optional<DlogProof> decode_dlog_proof(const Group& g, BytesView b) {
  std::size_t fixed = g.element_size() + 2 * g.scalar_size();
  if (b.size() < fixed) return std::nullopt;
  auto a = g.try_decode(b.subspan(0, g.element_size()));
  if (!a) return std::nullopt;
  auto c = g.try_decode_scalar(b.subspan(g.element_size(), g.scalar_size()));
  auto r = g.try_decode_scalar(
      b.subspan(g.element_size() + g.scalar_size(), g.scalar_size()));
  if (!c || !r) return std::nullopt;
  Bytes tag(b.begin() + static_cast<std::ptrdiff_t>(fixed), b.end());
  return DlogProof{std::move(*a), std::move(*c), std::move(*r), std::move(tag)};
}

Bytes encode_dlog_eq_proof(const Group& g, const DlogEqProof& p) {
  Bytes out = g.encode(p.commitment1);
  append(out, g.encode(p.commitment2));
  append(out, g.encode_scalar(p.challenge));
  append(out, g.encode_scalar(p.response));
  append(out, p.statement_tag);
  return out;
}

std::optional<DlogEqProof> decode_dlog_eq_proof(const Group& g, BytesView b) {
  std::size_t es = g.element_size();
  std::size_t ss = g.scalar_size();
  std::size_t fixed = 2 * es + 2 * ss;
  if (b.size() < fixed) return std::nullopt;
  auto a1 = g.try_decode(b.subspan(0, es));
  auto a2 = g.try_decode(b.subspan(es, es));
  if (!a1 || !a2) return std::nullopt;
  auto c = g.try_decode_scalar(b.subspan(2 * es, ss));
  auto r = g.try_decode_scalar(b.subspan(2 * es + ss, ss));
  if (!c || !r) return std::nullopt;
  Bytes tag(b.begin() + static_cast<std::ptrdiff_t>(fixed), b.end());
  return DlogEqProof{std::move(*a1), std::move(*a2), std::move(*c),
                     std::move(*r), std::move(tag)};
}

}  // namespace fairtrace::sigma
