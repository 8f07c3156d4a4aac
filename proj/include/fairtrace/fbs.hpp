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

#ifndef FAIRTRACE_FBS_HPP_
#define FAIRTRACE_FBS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "fairtrace/bytes.hpp"
#include "fairtrace/group.hpp"
#include "fairtrace/rng.hpp"
#include "fairtrace/sigma.hpp"

// Fair blind credential scheme. Credentials are issued through a four-move
// protocol in which the issuer signs blindly but a tracing key holder can
// later link a shown credential back to its issuing session, or derive from
// an issuing session the value that identifies the credential.
//
// Message flow (user U, issuer I):
//   U -> I  msg1: z_u = z^(1/gamma), proof log_g xi = log_{z_u} z
//   I -> U  msg2: z1 = y_t^upsilon, z2 = z_u/z1, proof log_{y_t} z1,
//                 commitments a, b1, b2
//   U -> I  msg3: blinded challenge e
//   I -> U  msg4: r, c, s1, s2, d with c = e - d, r = u - c*x
// The issuer keeps xi^upsilon as the session identifier. The user's blinding
// exponent lambda equals gamma, which is what makes the two tracing
// directions land on zeta1 and xi^upsilon respectively.

namespace fairtrace::fbs {

using group::Group;
using group::GroupElement;
using group::Scalar;

struct IssuerKey {
  Scalar x;
  GroupElement y;  // g^x
  GroupElement z;  // hash_to_group(p || q || g || h || y)
};

struct IssuerPublic {
  GroupElement y;
  GroupElement z;
};

struct UserIdentity {
  Scalar gamma;  // nonzero
  GroupElement xi;  // g^gamma
  std::string label;
};

// Per-request key pair a credential holder uses when asking for a trace; tau
// goes into the request so the result can be returned over a secure channel.
struct TracerSessionKey {
  Scalar iota;
  GroupElement tau;  // g^iota
};

struct IssueMsg1 {
  GroupElement z_u;
  sigma::DlogEqProof key_proof;
};

struct IssueMsg2 {
  GroupElement z1;
  GroupElement z2;
  sigma::DlogProof z1_proof;
  GroupElement a;
  GroupElement b1;
  GroupElement b2;
};

struct IssueMsg3 {
  Scalar e;
};

struct IssueMsg4 {
  Scalar r;
  Scalar c;
  Scalar s1;
  Scalar s2;
  Scalar d;
};

struct Credential {
  GroupElement zeta1;
  Scalar rho;
  Scalar omega_bar;
  Scalar sigma1;
  Scalar sigma2;
  Scalar delta;
  Bytes m;
};

enum class IssuerStage : std::uint8_t { AwaitMsg3 = 1, Done = 2 };
enum class UserStage : std::uint8_t { AwaitMsg2 = 1, AwaitMsg4 = 2, Done = 3 };

struct IssuerSession {
  GroupElement session_id;  // xi^upsilon
  Scalar upsilon;
  GroupElement z1;
  GroupElement z2;
  Scalar u;
  Scalar s1;
  Scalar s2;
  Scalar d;
  GroupElement xi;
  std::string label;
  IssuerStage stage;
};

struct UserSession {
  Scalar lambda;  // = gamma
  GroupElement z_u;
  IssuerPublic issuer;
  GroupElement y_t;
  GroupElement zeta1;
  GroupElement zeta2;  // z / zeta1
  Scalar t1, t2, t3, t4, t5;
  Scalar epsilon;
  Scalar e;
  GroupElement alpha;
  GroupElement beta1;
  GroupElement beta2;
  UserStage stage;
};

struct RegistryEntry {
  GroupElement xi;
  std::string label;
  std::uint64_t issued_at;
};

// Issuer-side record of completed issuances, keyed by session identifier.
// Concurrent reads, serialized writes.
class SessionRegistry {
 public:
  void record(const Group& g, const GroupElement& session_id,
              RegistryEntry entry);
  std::optional<RegistryEntry> lookup(const Group& g,
                                      const GroupElement& session_id) const;
  std::size_t size() const;
  // Snapshot sorted by encoded session id.
  std::vector<std::pair<Bytes, RegistryEntry>> entries() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<Bytes, RegistryEntry> map_;
};

IssuerKey issuer_keygen(const Group& g, Rng& rng);
IssuerPublic issuer_public(const IssuerKey& ik);
// The tag key, recomputable by anyone from public data.
GroupElement derive_tag_key(const Group& g, const GroupElement& y);
UserIdentity user_keygen(const Group& g, std::string label, Rng& rng);
TracerSessionKey tracer_keygen(const Group& g, Rng& rng);

// Four-move issuing protocol. Callers move messages between the two sides;
// each side's session object is single-owner.
std::pair<IssueMsg1, UserSession> user_start(const Group& g,
                                             const UserIdentity& user,
                                             const IssuerPublic& issuer,
                                             const GroupElement& y_t, Rng& rng);
// Draw order, relied on by transcript tests: upsilon (resampled while
// degenerate), proof nonce, then u, s1, s2, d.
std::pair<IssueMsg2, IssuerSession> issuer_session_start(
    const Group& g, const IssuerKey& ik, const GroupElement& y_t,
    const IssueMsg1& msg1, const GroupElement& xi, std::string label, Rng& rng);
// Draw order: t1..t5.
IssueMsg3 user_blind(const Group& g, UserSession& us, const IssueMsg2& msg2,
                     BytesView m, Rng& rng);
IssueMsg4 issuer_respond(const Group& g, IssuerSession& is, const IssuerKey& ik,
                         const IssueMsg3& msg3, SessionRegistry& registry,
                         std::uint64_t now);
Credential user_finalize(const Group& g, UserSession& us, const IssueMsg4& msg4,
                         BytesView m);

bool verify_sig(const Group& g, const IssuerPublic& issuer,
                const Credential& cred);
// 1 iff the credential verifies and its zeta1 equals the traced element.
bool match_sig(const Group& g, const IssuerPublic& issuer,
               const Credential& cred, const GroupElement& traced);
// 1 iff the session identifier equals the traced element.
bool match_id(const GroupElement& session_id, const GroupElement& traced);

// Tagged binary frames for the wire.
Bytes encode_msg1(const Group& g, const IssueMsg1& m);
IssueMsg1 decode_msg1(const Group& g, BytesView b);
Bytes encode_msg2(const Group& g, const IssueMsg2& m);
IssueMsg2 decode_msg2(const Group& g, BytesView b);
Bytes encode_msg3(const Group& g, const IssueMsg3& m);
IssueMsg3 decode_msg3(const Group& g, BytesView b);
Bytes encode_msg4(const Group& g, const IssueMsg4& m);
IssueMsg4 decode_msg4(const Group& g, BytesView b);

// Credential persistence: hex fields, message base64.
std::string credential_to_json(const Group& g, const Credential& cred);
Credential credential_from_json(const Group& g, std::string_view text);

}  // namespace fairtrace::fbs

#endif  // FAIRTRACE_FBS_HPP_
