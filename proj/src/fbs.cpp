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

#include "fairtrace/fbs.hpp"

#include <mutex>

#include <json.hpp>

#include "fairtrace/errors.hpp"

namespace fairtrace::fbs {

namespace {

constexpr std::uint8_t kTagMsg1 = 0x01;
constexpr std::uint8_t kTagMsg2 = 0x02;
constexpr std::uint8_t kTagMsg3 = 0x03;
constexpr std::uint8_t kTagMsg4 = 0x04;

constexpr std::string_view kH2Tag = "H2";

Scalar h2(const Group& g, const GroupElement& zeta1, const GroupElement& alpha,
          const GroupElement& beta1, const GroupElement& beta2, BytesView m) {
  return g.hash_to_scalar(to_bytes(kH2Tag),
                          {g.encode(zeta1), g.encode(alpha), g.encode(beta1),
                           g.encode(beta2), Bytes(m.begin(), m.end())});
}

void expect_tag(FrameReader& fr, std::uint8_t want) {
  if (fr.u8() != want) fail("malformed-frame", "wrong message tag");
}

}  // namespace

// ------------------------------------------------------------ registry

void SessionRegistry::record(const Group& g, const GroupElement& session_id,
                              RegistryEntry entry) {
  std::unique_lock lock(mu_);
  map_.insert_or_assign(g.encode(session_id), std::move(entry));
}

std::optional<RegistryEntry> SessionRegistry::lookup(
    const Group& g, const GroupElement& session_id) const {
  std::shared_lock lock(mu_);
  auto it = map_.find(g.encode(session_id));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

std::size_t SessionRegistry::size() const {
  std::shared_lock lock(mu_);
  return map_.size();
}

std::vector<std::pair<Bytes, RegistryEntry>> SessionRegistry::entries() const {
  std::shared_lock lock(mu_);
  return {map_.begin(), map_.end()};
}

// ------------------------------------------------------------ keygen

IssuerKey issuer_keygen(const Group& g, Rng& rng) {
  Scalar x = g.random_scalar_nonzero(rng);
  GroupElement y = g.exp(g.generator(), x);
  GroupElement z = derive_tag_key(g, y);
  return IssuerKey{std::move(x), std::move(y), std::move(z)};
}

IssuerPublic issuer_public(const IssuerKey& ik) {
  return IssuerPublic{ik.y, ik.z};
}

GroupElement derive_tag_key(const Group& g, const GroupElement& y) {
  Bytes input = g.p_bytes();
  append(input, g.q_bytes());
  append(input, g.encode(g.generator()));
  append(input, g.encode(g.second_generator()));
  append(input, g.encode(y));
  return g.hash_to_group(input);
}

UserIdentity user_keygen(const Group& g, std::string label, Rng& rng) {
  Scalar gamma = g.random_scalar_nonzero(rng);
  GroupElement xi = g.exp(g.generator(), gamma);
  return UserIdentity{std::move(gamma), std::move(xi), std::move(label)};
}

TracerSessionKey tracer_keygen(const Group& g, Rng& rng) {
  Scalar iota = g.random_scalar_nonzero(rng);
  GroupElement tau = g.exp(g.generator(), iota);
  return TracerSessionKey{std::move(iota), std::move(tau)};
}

// ------------------------------------------------------------ issuing

std::pair<IssueMsg1, UserSession> user_start(const Group& g,
                                             const UserIdentity& user,
                                             const IssuerPublic& issuer,
                                             const GroupElement& y_t,
                                             Rng& rng) {
  GroupElement z_u = g.exp(issuer.z, g.sc_inv(user.gamma));
  // log_g xi = log_{z_u} z, both equal to gamma.
  sigma::DlogEqProof proof =
      sigma::prove_dlog_eq(g, g.generator(), z_u, user.gamma,
                           to_bytes(sigma::kDlogEqTag), rng);
  UserSession us;
  us.lambda = user.gamma;
  us.z_u = z_u;
  us.issuer = issuer;
  us.y_t = y_t;
  us.stage = UserStage::AwaitMsg2;
  return {IssueMsg1{std::move(z_u), std::move(proof)}, std::move(us)};
}

std::pair<IssueMsg2, IssuerSession> issuer_session_start(
    const Group& g, const IssuerKey& ik, const GroupElement& y_t,
    const IssueMsg1& msg1, const GroupElement& xi, std::string label,
    Rng& rng) {
  if (!sigma::verify_dlog_eq(g, g.generator(), xi, msg1.z_u, ik.z,
                             msg1.key_proof, to_bytes(sigma::kDlogEqTag)))
    fail("bad-dleq-proof", "msg1 key proof does not verify");

  Scalar upsilon = g.scalar_zero();
  GroupElement z1 = g.identity();
  for (;;) {
    upsilon = g.random_scalar_nonzero(rng);
    z1 = g.exp(y_t, upsilon);
    if (!g.is_identity(z1) && !(z1 == msg1.z_u)) break;
  }
  GroupElement z2 = g.div(msg1.z_u, z1);
  GroupElement session_id = g.exp(xi, upsilon);

  sigma::DlogProof z1_proof =
      sigma::prove_dlog(g, y_t, upsilon, to_bytes(sigma::kDlogTag), rng);

  Scalar u = g.random_scalar(rng);
  Scalar s1 = g.random_scalar(rng);
  Scalar s2 = g.random_scalar(rng);
  Scalar d = g.random_scalar(rng);
  // y-side commitment is real; z-side is simulated with fixed challenge d.
  GroupElement a = g.exp(g.generator(), u);
  GroupElement b1 = g.mul(g.exp(g.generator(), s1), g.exp(z1, d));
  GroupElement b2 = g.mul(g.exp(g.second_generator(), s2), g.exp(z2, d));

  IssuerSession is;
  is.session_id = session_id;
  is.upsilon = upsilon;
  is.z1 = z1;
  is.z2 = z2;
  is.u = u;
  is.s1 = s1;
  is.s2 = s2;
  is.d = d;
  is.xi = xi;
  is.label = std::move(label);
  is.stage = IssuerStage::AwaitMsg3;
  return {IssueMsg2{std::move(z1), std::move(z2), std::move(z1_proof),
                    std::move(a), std::move(b1), std::move(b2)},
          std::move(is)};
}

IssueMsg3 user_blind(const Group& g, UserSession& us, const IssueMsg2& msg2,
                     BytesView m, Rng& rng) {
  if (us.stage != UserStage::AwaitMsg2)
    fail("out-of-order-message", "user session not expecting msg2");
  if (g.is_identity(msg2.z1) || g.is_identity(msg2.z2) ||
      !(g.mul(msg2.z1, msg2.z2) == us.z_u) ||
      !sigma::verify_dlog(g, us.y_t, msg2.z1, msg2.z1_proof,
                          to_bytes(sigma::kDlogTag)))
    fail("bad-z1-proof", "msg2 tracing presentation rejected");

  us.zeta1 = g.exp(msg2.z1, us.lambda);
  us.zeta2 = g.div(us.issuer.z, us.zeta1);
  us.t1 = g.random_scalar(rng);
  us.t2 = g.random_scalar(rng);
  us.t3 = g.random_scalar(rng);
  us.t4 = g.random_scalar(rng);
  us.t5 = g.random_scalar(rng);

  us.alpha = g.mul(msg2.a, g.mul(g.exp(g.generator(), us.t1),
                                 g.exp(us.issuer.y, us.t2)));
  us.beta1 = g.mul(g.exp(msg2.b1, us.lambda),
                   g.mul(g.exp(g.generator(), us.t3), g.exp(us.zeta1, us.t4)));
  us.beta2 =
      g.mul(g.exp(msg2.b2, us.lambda),
            g.mul(g.exp(g.second_generator(), us.t5), g.exp(us.zeta2, us.t4)));
  us.epsilon = h2(g, us.zeta1, us.alpha, us.beta1, us.beta2, m);
  us.e = g.sc_sub(g.sc_sub(us.epsilon, us.t2), us.t4);
  us.stage = UserStage::AwaitMsg4;
  return IssueMsg3{us.e};
}

IssueMsg4 issuer_respond(const Group& g, IssuerSession& is, const IssuerKey& ik,
                         const IssueMsg3& msg3, SessionRegistry& registry,
                         std::uint64_t now) {
  if (is.stage != IssuerStage::AwaitMsg3)
    fail("out-of-order-message", "issuer session not expecting msg3");
  Scalar c = g.sc_sub(msg3.e, is.d);
  Scalar r = g.sc_sub(is.u, g.sc_mul(c, ik.x));
  is.stage = IssuerStage::Done;
  registry.record(g, is.session_id, RegistryEntry{is.xi, is.label, now});
  return IssueMsg4{std::move(r), std::move(c), is.s1, is.s2, is.d};
}

Credential user_finalize(const Group& g, UserSession& us, const IssueMsg4& msg4,
                         BytesView m) {
  if (us.stage != UserStage::AwaitMsg4)
    fail("out-of-order-message", "user session not expecting msg4");
  Credential cred;
  cred.zeta1 = us.zeta1;
  cred.rho = g.sc_add(msg4.r, us.t1);
  cred.omega_bar = g.sc_add(msg4.c, us.t2);
  cred.sigma1 = g.sc_add(g.sc_mul(us.lambda, msg4.s1), us.t3);
  cred.sigma2 = g.sc_add(g.sc_mul(us.lambda, msg4.s2), us.t5);
  cred.delta = g.sc_add(msg4.d, us.t4);
  cred.m = Bytes(m.begin(), m.end());
  us.stage = UserStage::Done;
  if (!verify_sig(g, us.issuer, cred))
    fail("protocol-failure", "issuer responses are inconsistent");
  return cred;
}

bool verify_sig(const Group& g, const IssuerPublic& issuer,
                const Credential& cred) {
  GroupElement alpha = g.mul(g.exp(g.generator(), cred.rho),
                             g.exp(issuer.y, cred.omega_bar));
  GroupElement beta1 = g.mul(g.exp(g.generator(), cred.sigma1),
                             g.exp(cred.zeta1, cred.delta));
  GroupElement beta2 =
      g.mul(g.exp(g.second_generator(), cred.sigma2),
            g.exp(g.div(issuer.z, cred.zeta1), cred.delta));
  Scalar eps = h2(g, cred.zeta1, alpha, beta1, beta2, cred.m);
  return g.sc_add(cred.omega_bar, cred.delta) == eps;
}

bool match_sig(const Group& g, const IssuerPublic& issuer,
               const Credential& cred, const GroupElement& traced) {
  return verify_sig(g, issuer, cred) && cred.zeta1 == traced;
}

bool match_id(const GroupElement& session_id, const GroupElement& traced) {
  return session_id == traced;
}

// ------------------------------------------------------------ wire codecs

Bytes encode_msg1(const Group& g, const IssueMsg1& m) {
  FrameWriter fw;
  fw.u8(kTagMsg1);
  fw.bytes(g.encode(m.z_u));
  fw.bytes(sigma::encode_dlog_eq_proof(g, m.key_proof));
  return fw.take();
}

IssueMsg1 decode_msg1(const Group& g, BytesView b) {
  FrameReader fr(b);
  expect_tag(fr, kTagMsg1);
  GroupElement z_u = g.decode(fr.bytes());
  auto proof = sigma::decode_dlog_eq_proof(g, fr.bytes());
  fr.expect_done();
  if (!proof) fail("malformed-frame", "bad proof encoding in msg1");
  return IssueMsg1{std::move(z_u), std::move(*proof)};
}

Bytes encode_msg2(const Group& g, const IssueMsg2& m) {
  FrameWriter fw;
  fw.u8(kTagMsg2);
  fw.bytes(g.encode(m.z1));
  fw.bytes(g.encode(m.z2));
  fw.bytes(sigma::encode_dlog_proof(g, m.z1_proof));
  fw.bytes(g.encode(m.a));
  fw.bytes(g.encode(m.b1));
  fw.bytes(g.encode(m.b2));
  return fw.take();
}

IssueMsg2 decode_msg2(const Group& g, BytesView b) {
  FrameReader fr(b);
  expect_tag(fr, kTagMsg2);
  GroupElement z1 = g.decode(fr.bytes());
  GroupElement z2 = g.decode(fr.bytes());
  auto proof = sigma::decode_dlog_proof(g, fr.bytes());
  GroupElement a = g.decode(fr.bytes());
  GroupElement b1 = g.decode(fr.bytes());
  GroupElement b2 = g.decode(fr.bytes());
  fr.expect_done();
  if (!proof) fail("malformed-frame", "bad proof encoding in msg2");
  return IssueMsg2{std::move(z1), std::move(z2), std::move(*proof),
                   std::move(a), std::move(b1), std::move(b2)};
}

Bytes encode_msg3(const Group& g, const IssueMsg3& m) {
  FrameWriter fw;
  fw.u8(kTagMsg3);
  fw.bytes(g.encode_scalar(m.e));
  return fw.take();
}

IssueMsg3 decode_msg3(const Group& g, BytesView b) {
  FrameReader fr(b);
  expect_tag(fr, kTagMsg3);
  Scalar e = g.decode_scalar(fr.bytes());
  fr.expect_done();
  return IssueMsg3{std::move(e)};
}

Bytes encode_msg4(const Group& g, const IssueMsg4& m) {
  FrameWriter fw;
  fw.u8(kTagMsg4);
  fw.bytes(g.encode_scalar(m.r));
  fw.bytes(g.encode_scalar(m.c));
  fw.bytes(g.encode_scalar(m.s1));
  fw.bytes(g.encode_scalar(m.s2));
  fw.bytes(g.encode_scalar(m.d));
  return fw.take();
}

IssueMsg4 decode_msg4(const Group& g, BytesView b) {
  FrameReader fr(b);
  expect_tag(fr, kTagMsg4);
  Scalar r = g.decode_scalar(fr.bytes());
  Scalar c = g.decode_scalar(fr.bytes());
  Scalar s1 = g.decode_scalar(fr.bytes());
  Scalar s2 = g.decode_scalar(fr.bytes());
  Scalar d = g.decode_scalar(fr.bytes());
  fr.expect_done();
  return IssueMsg4{std::move(r), std::move(c), std::move(s1), std::move(s2),
                   std::move(d)};
}

// ------------------------------------------------------------ persistence

std::string credential_to_json(const Group& g, const Credential& cred) {
  nlohmann::ordered_json j;
  j["zeta1"] = hex_encode(g.encode(cred.zeta1));
  j["rho"] = hex_encode(g.encode_scalar(cred.rho));
  j["omega_bar"] = hex_encode(g.encode_scalar(cred.omega_bar));
  j["sigma1"] = hex_encode(g.encode_scalar(cred.sigma1));
  j["sigma2"] = hex_encode(g.encode_scalar(cred.sigma2));
  j["delta"] = hex_encode(g.encode_scalar(cred.delta));
  j["m"] = base64_encode(cred.m);
  return j.dump(2);
}

Credential credential_from_json(const Group& g, std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    fail("malformed-encoding", "credential is not a JSON object");
  auto hex_field = [&](const char* name) -> Bytes {
    if (!j.contains(name) || !j[name].is_string())
      fail("malformed-encoding", std::string("missing field ") + name);
    auto bytes = hex_decode(j[name].get<std::string>());
    if (!bytes) fail("malformed-encoding", std::string("bad hex in ") + name);
    return *bytes;
  };
  Credential cred;
  cred.zeta1 = g.decode(hex_field("zeta1"));
  cred.rho = g.decode_scalar(hex_field("rho"));
  cred.omega_bar = g.decode_scalar(hex_field("omega_bar"));
  cred.sigma1 = g.decode_scalar(hex_field("sigma1"));
  cred.sigma2 = g.decode_scalar(hex_field("sigma2"));
  cred.delta = g.decode_scalar(hex_field("delta"));
  if (!j.contains("m") || !j["m"].is_string())
    fail("malformed-encoding", "missing field m");
  auto m = base64_decode(j["m"].get<std::string>());
  if (!m) fail("malformed-encoding", "bad base64 in m");
  cred.m = *m;
  return cred;
}

}  // namespace fairtrace::fbs
