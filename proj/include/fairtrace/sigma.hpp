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

#ifndef FAIRTRACE_SIGMA_HPP_
#define FAIRTRACE_SIGMA_HPP_

#include <optional>

#include "fairtrace/bytes.hpp"
#include "fairtrace/group.hpp"
#include "fairtrace/rng.hpp"

// Non-interactive sigma protocols (Fiat-Shamir transformed). The challenge
// binds the statement tag and every public value, so a proof transplanted to
// any other statement or tag fails the challenge recomputation.

namespace fairtrace::sigma {

using group::Group;
using group::GroupElement;
using group::Scalar;

inline constexpr std::string_view kDlogTag = "PF-DLOG";
inline constexpr std::string_view kDlogEqTag = "PF-DLEQ";

// Schnorr proof of knowledge of s with Y = base^s.
// challenge = H2(tag, [base, Y, commitment]), response = k - challenge*s.
struct DlogProof {
  GroupElement commitment;
  Scalar challenge;
  Scalar response;
  Bytes statement_tag;
};

// Chaum-Pedersen proof of log_{b1} Y1 = log_{b2} Y2.
struct DlogEqProof {
  GroupElement commitment1;
  GroupElement commitment2;
  Scalar challenge;
  Scalar response;
  Bytes statement_tag;
};

DlogProof prove_dlog(const Group& g, const GroupElement& base,
                     const Scalar& secret, BytesView tag, Rng& rng);
bool verify_dlog(const Group& g, const GroupElement& base,
                 const GroupElement& y, const DlogProof& proof, BytesView tag);

DlogEqProof prove_dlog_eq(const Group& g, const GroupElement& b1,
                          const GroupElement& b2, const Scalar& secret,
                          BytesView tag, Rng& rng);
bool verify_dlog_eq(const Group& g, const GroupElement& b1,
                    const GroupElement& y1, const GroupElement& b2,
                    const GroupElement& y2, const DlogEqProof& proof,
                    BytesView tag);

// Fixed-layout serialization: field encodings concatenated, tag last.
Bytes encode_dlog_proof(const Group& g, const DlogProof& p);
std::optional<DlogProof> decode_dlog_proof(const Group& g, BytesView b);
Bytes encode_dlog_eq_proof(const Group& g, const DlogEqProof& p);
std::optional<DlogEqProof> decode_dlog_eq_proof(const Group& g, BytesView b);

}  // namespace fairtrace::sigma

#endif  // FAIRTRACE_SIGMA_HPP_
