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

#include <doctest.h>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairtrace/bytes.hpp"
#include "fairtrace/crypto.hpp"
#include "fairtrace/enclave.hpp"
#include "fairtrace/errors.hpp"
#include "fairtrace/fbs.hpp"
#include "fairtrace/group.hpp"
#include "fairtrace/rng.hpp"

namespace {

using namespace fairtrace;
using enclave::ConfirmationReceipt;
using enclave::DeployBundle;
using enclave::Platform;
using group::Backend;
using group::Group;

// Minimal deterministic contract: state accumulates inputs, output binds the
// prior state to the input.
class EchoLogic : public enclave::ContractLogic {
 public:
  Bytes init(const Group&, BytesView params, Rng&) override {
    return Bytes(params.begin(), params.end());
  }
  std::pair<Bytes, Bytes> step(const Group&, BytesView state, BytesView input,
                               Rng&) override {
    Bytes next(state.begin(), state.end());
    append(next, input);
    Bytes out = crypto::sha256(state);
    append(out, input);
    return {next, out};
  }
};

class FaultyLogic : public enclave::ContractLogic {
 public:
  Bytes init(const Group&, BytesView, Rng&) override { return {}; }
  std::pair<Bytes, Bytes> step(const Group&, BytesView, BytesView,
                               Rng&) override {
    throw std::runtime_error("division by zero");
  }
};

void register_test_kinds(Platform& p) {
  p.register_kind("test/echo", [] { return std::make_unique<EchoLogic>(); });
  p.register_kind("test/fault",
                  [] { return std::make_unique<FaultyLogic>(); });
}

ConfirmationReceipt confirmed(std::uint64_t depth) {
  ConfirmationReceipt r;
  r.txid = to_bytes("txid");
  r.height = 1;
  r.depth = depth;
  return r;
}

std::string error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("deployment produces a validator-acceptable bundle") {
  DrbgRng rng(to_bytes("deploy"));
  Platform p(Backend::Ec128, rng);
  register_test_kinds(p);

  Bytes params = to_bytes("init-params");
  DeployBundle b = p.deploy_contract("test/echo", params);

  CHECK(b.contract_id.size() == 32);
  CHECK(b.state_init.version == 0);
  CHECK(b.state_init.contract_id == b.contract_id);
  CHECK(b.attestation.measurement ==
        crypto::sha256(enclave::bytecode_frame("test/echo", params)));
  CHECK(enclave::validate_deploy_bundle(b, p.manufacturer_public(),
                                        p.service_public()));
  // The service proof verifies under the service key on its own.
  CHECK(crypto::verify_signature(p.service_public(),
                                 enclave::encode_attestation(b.attestation),
                                 b.service_proof));

  SUBCASE("second deployment is fully independent") {
    DeployBundle b2 = p.deploy_contract("test/echo", params);
    CHECK(b2.contract_id != b.contract_id);
    CHECK(b2.attestation.enclave_public != b.attestation.enclave_public);
    CHECK(b2.attestation.input_public != b.attestation.input_public);
    CHECK(b2.attestation.measurement == b.attestation.measurement);
  }

  SUBCASE("mutated initial state breaks the attestation binding") {
    DeployBundle bad = b;
    bad.state_init.blob[3] ^= 0x01;
    CHECK_FALSE(enclave::validate_deploy_bundle(bad, p.manufacturer_public(),
                                                p.service_public()));
  }

  SUBCASE("mutated report hash breaks the enclave signature") {
    DeployBundle bad = b;
    bad.attestation.state_init_hash[0] ^= 0x01;
    CHECK_FALSE(enclave::validate_deploy_bundle(bad, p.manufacturer_public(),
                                                p.service_public()));
  }

  SUBCASE("service proof does not transfer to another contract") {
    DeployBundle other = p.deploy_contract("test/echo", params);
    DeployBundle spliced = other;
    spliced.service_proof = b.service_proof;
    CHECK_FALSE(enclave::validate_deploy_bundle(
        spliced, p.manufacturer_public(), p.service_public()));
  }

  SUBCASE("foreign platform keys are rejected") {
    DrbgRng rng2(to_bytes("other-platform"));
    Platform q(Backend::Ec128, rng2);
    CHECK_FALSE(enclave::validate_deploy_bundle(b, q.manufacturer_public(),
                                                q.service_public()));
  }
}

TEST_CASE("attestation service rejects tampered reports") {
  DrbgRng rng(to_bytes("attest"));
  Platform p(Backend::Ec128, rng);
  register_test_kinds(p);
  DeployBundle b = p.deploy_contract("test/echo", to_bytes("x"));

  CHECK(p.verify_attestation(b.attestation).size() ==
        crypto::kSignatureSize);

  auto wrong_measurement = b.attestation;
  wrong_measurement.measurement = crypto::sha256(to_bytes("other"));
  CHECK_THROWS_AS((void)p.verify_attestation(wrong_measurement), Error);
  CHECK(error_code([&] { (void)p.verify_attestation(wrong_measurement); }) ==
        "bad-attestation");

  auto wrong_id = b.attestation;
  wrong_id.contract_id[0] = wrong_id.contract_id[0] == 'a' ? 'b' : 'a';
  CHECK(error_code([&] { (void)p.verify_attestation(wrong_id); }) ==
        "bad-attestation");
}

TEST_CASE("unknown kinds and contracts are refused") {
  DrbgRng rng(to_bytes("refuse"));
  Platform p(Backend::Ec128, rng);
  register_test_kinds(p);
  CHECK(error_code([&] { (void)p.deploy_contract("test/none", {}); }) ==
        "unknown-kind");
  CHECK(error_code([&] { (void)p.input_public("deadbeef"); }) ==
        "unknown-contract");
  CHECK(error_code([&] {
          register_test_kinds(p);
        }) == "duplicate-kind");
}

TEST_CASE("execution applies the contract and versions the state") {
  DrbgRng rng(to_bytes("exec"));
  Platform p(Backend::Ec128, rng);
  register_test_kinds(p);
  DeployBundle b = p.deploy_contract("test/echo", to_bytes("s0"));
  const std::string& cid = b.contract_id;

  Bytes input = to_bytes("first-input");
  Bytes input_ct =
      enclave::seal_contract_input(p.input_public(cid), cid, input, rng);
  auto out = p.execute(cid, input_ct, b.state_init);

  CHECK(out.new_state.version == 1);
  CHECK(out.new_state.contract_id == cid);
  CHECK(out.output_ct.size() > crypto::kAeadNonceSize + crypto::kAeadTagSize);

  SUBCASE("proof binds exactly the five hashes") {
    Bytes frame = enclave::exec_proof_frame(
        cid, crypto::sha256(input_ct), crypto::sha256(out.output_ct),
        crypto::sha256(enclave::encode_sealed_state(b.state_init)),
        crypto::sha256(enclave::encode_sealed_state(out.new_state)));
    CHECK(crypto::verify_signature(p.enclave_public(cid), frame, out.proof));
    Bytes wrong = enclave::exec_proof_frame(
        cid, crypto::sha256(out.output_ct), crypto::sha256(input_ct),
        crypto::sha256(enclave::encode_sealed_state(b.state_init)),
        crypto::sha256(enclave::encode_sealed_state(out.new_state)));
    CHECK_FALSE(
        crypto::verify_signature(p.enclave_public(cid), wrong, out.proof));
  }

  SUBCASE("replayed old state raises stale-state") {
    CHECK(error_code([&] { (void)p.execute(cid, input_ct, b.state_init); }) ==
          "stale-state");
  }

  SUBCASE("tampered sealed blob raises stale-state") {
    auto forged = out.new_state;
    forged.blob[forged.blob.size() / 2] ^= 0x01;
    CHECK(error_code([&] { (void)p.execute(cid, input_ct, forged); }) ==
          "stale-state");
  }

  SUBCASE("versions increase strictly across a run") {
    auto st = out.new_state;
    for (std::uint64_t v = 2; v <= 5; ++v) {
      Bytes ct = enclave::seal_contract_input(p.input_public(cid), cid,
                                              to_bytes("in"), rng);
      auto next = p.execute(cid, ct, st);
      CHECK(next.new_state.version == v);
      st = next.new_state;
    }
    Bytes ct = enclave::seal_contract_input(p.input_public(cid), cid,
                                            to_bytes("in"), rng);
    CHECK(error_code([&] { (void)p.execute(cid, ct, out.new_state); }) ==
          "stale-state");
  }

  SUBCASE("input for another contract is rejected") {
    DeployBundle other = p.deploy_contract("test/echo", to_bytes("s0"));
    Bytes foreign = enclave::seal_contract_input(p.input_public(other.contract_id),
                                                 cid, input, rng);
    CHECK(error_code([&] {
            (void)p.execute(cid, foreign, out.new_state);
          }) == "bad-input-ciphertext");
  }

  SUBCASE("contract exceptions surface as contract-fault") {
    DeployBundle f = p.deploy_contract("test/fault", {});
    Bytes ct = enclave::seal_contract_input(p.input_public(f.contract_id),
                                            f.contract_id, to_bytes("x"),
                                            rng);
    CHECK(error_code([&] {
            (void)p.execute(f.contract_id, ct, f.state_init);
          }) == "contract-fault");
  }
}

TEST_CASE("channel handshake, transport, and release discipline") {
  DrbgRng rng(to_bytes("channel"));
  Platform p(Backend::Ec128, rng);
  register_test_kinds(p);
  DeployBundle b = p.deploy_contract("test/echo", to_bytes("base"));
  const std::string& cid = b.contract_id;
  const Group& g = p.group();

  auto tracer = fbs::tracer_keygen(g, rng);
  auto offer = p.open_channel(cid, tracer.tau);
  auto end = enclave::accept_channel(g, offer, tracer, p.enclave_public(cid));

  Bytes input = to_bytes("query");
  Bytes input_ct =
      enclave::seal_contract_input(p.input_public(cid), cid, input, rng);
  auto out = p.execute(cid, input_ct, b.state_init);

  SUBCASE("confirmed receipt leads to plaintext over the channel") {
    Bytes framed = p.release_output(cid, tracer.tau, out.output_ct,
                                    confirmed(2));
    auto pt = end.open(framed);
    REQUIRE(pt.has_value());
    Bytes expected = crypto::sha256(to_bytes("base"));
    append(expected, input);
    CHECK(*pt == expected);

    // Output keys are single use.
    CHECK(error_code([&] {
            (void)p.release_output(cid, tracer.tau, out.output_ct,
                                   confirmed(2));
          }) == "unknown-output");
  }

  SUBCASE("shallow confirmation is refused") {
    CHECK(error_code([&] {
            (void)p.release_output(cid, tracer.tau, out.output_ct,
                                   confirmed(1));
          }) == "unconfirmed-transaction");
    // Depth reached afterwards: release succeeds, nothing was lost.
    Bytes framed = p.release_output(cid, tracer.tau, out.output_ct,
                                    confirmed(3));
    CHECK(end.open(framed).has_value());
  }

  SUBCASE("no channel, no plaintext") {
    auto stranger = fbs::tracer_keygen(g, rng);
    CHECK(error_code([&] {
            (void)p.release_output(cid, stranger.tau, out.output_ct,
                                   confirmed(2));
          }) == "channel-closed");
  }

  SUBCASE("off-channel ciphertext stays opaque") {
    Bytes wrong_key = rng.bytes(crypto::kAeadKeySize);
    BytesView ct(out.output_ct);
    auto opened = crypto::aead_open(
        wrong_key, ct.subspan(0, crypto::kAeadNonceSize), to_bytes(cid),
        ct.subspan(crypto::kAeadNonceSize));
    CHECK_FALSE(opened.has_value());
  }

  SUBCASE("mismatched session key fails the handshake") {
    auto other = fbs::tracer_keygen(g, rng);
    CHECK(error_code([&] {
            (void)enclave::accept_channel(g, offer, other,
                                          p.enclave_public(cid));
          }) == "channel-mismatch");
    auto forged = offer;
    forged.sig[10] ^= 0x01;
    CHECK(error_code([&] {
            (void)enclave::accept_channel(g, forged, tracer,
                                          p.enclave_public(cid));
          }) == "channel-mismatch");
  }

  SUBCASE("channel frames authenticate and stay in order") {
    Bytes f0 = p.release_output(cid, tracer.tau, out.output_ct, confirmed(2));

    Bytes flipped = f0;
    flipped[flipped.size() - 1] ^= 0x01;
    CHECK_FALSE(end.open(flipped).has_value());

    REQUIRE(end.open(f0).has_value());
    // Replay of a consumed frame is dropped.
    CHECK_FALSE(end.open(f0).has_value());

    // Tracer-to-enclave direction works against a fresh peer end.
    Bytes up = end.seal(to_bytes("ack"));
    CHECK(up[0] == 0x02);
    // A frame cannot be fed back into its own sender.
    CHECK_FALSE(end.open(up).has_value());
  }
}

TEST_CASE("channel derivation is a deterministic transcript") {
  auto run = [](const std::string& seed) {
    DrbgRng rng(to_bytes(seed));
    Platform p(Backend::Ec128, rng);
    register_test_kinds(p);
    DeployBundle b = p.deploy_contract("test/echo", to_bytes("kat"));
    auto tracer = fbs::tracer_keygen(p.group(), rng);
    auto offer = p.open_channel(b.contract_id, tracer.tau);
    Bytes input_ct = enclave::seal_contract_input(
        p.input_public(b.contract_id), b.contract_id, to_bytes("m"), rng);
    auto out = p.execute(b.contract_id, input_ct, b.state_init);
    Bytes framed = p.release_output(b.contract_id, tracer.tau, out.output_ct,
                                    confirmed(2));
    auto end = enclave::accept_channel(p.group(), offer, tracer,
                                       p.enclave_public(b.contract_id));
    auto pt = end.open(framed);
    REQUIRE(pt.has_value());
    return std::pair{framed, *pt};
  };
  auto [f1, p1] = run("transcript");
  auto [f2, p2] = run("transcript");
  CHECK(f1 == f2);
  CHECK(p1 == p2);
  auto [f3, p3] = run("other-transcript");
  CHECK(f3 != f1);
}

TEST_CASE("platform events order releases after executions") {
  DrbgRng rng(to_bytes("events"));
  Platform p(Backend::Ec128, rng);
  register_test_kinds(p);
  std::vector<std::string> events;
  p.set_observer([&](std::string_view e, std::string_view) {
    events.emplace_back(e);
  });

  DeployBundle b = p.deploy_contract("test/echo", to_bytes("s"));
  auto tracer = fbs::tracer_keygen(p.group(), rng);
  (void)p.open_channel(b.contract_id, tracer.tau);
  Bytes ct = enclave::seal_contract_input(p.input_public(b.contract_id),
                                          b.contract_id, to_bytes("q"), rng);
  auto out = p.execute(b.contract_id, ct, b.state_init);
  (void)p.release_output(b.contract_id, tracer.tau, out.output_ct,
                         confirmed(2));

  REQUIRE(events.size() == 4);
  CHECK(events ==
        std::vector<std::string>{"deploy", "channel", "execute", "release"});
}

TEST_CASE("enclave frame codecs roundtrip and reject truncation") {
  DrbgRng rng(to_bytes("codec"));
  Platform p(Backend::Ec128, rng);
  register_test_kinds(p);
  DeployBundle b = p.deploy_contract("test/echo", to_bytes("payload"));

  Bytes sealed = enclave::encode_sealed_state(b.state_init);
  auto st = enclave::decode_sealed_state(sealed);
  CHECK(st.contract_id == b.state_init.contract_id);
  CHECK(st.version == b.state_init.version);
  CHECK(st.blob == b.state_init.blob);

  Bytes att = enclave::encode_attestation(b.attestation);
  auto a = enclave::decode_attestation(att);
  CHECK(enclave::encode_attestation(a) == att);

  Bytes bundle = enclave::encode_deploy_bundle(b);
  auto d = enclave::decode_deploy_bundle(bundle);
  CHECK(enclave::encode_deploy_bundle(d) == bundle);
  CHECK(enclave::validate_deploy_bundle(d, p.manufacturer_public(),
                                        p.service_public()));

  auto tracer = fbs::tracer_keygen(p.group(), rng);
  auto offer = p.open_channel(b.contract_id, tracer.tau);
  Bytes off = enclave::encode_channel_offer(offer);
  auto o = enclave::decode_channel_offer(off);
  CHECK(enclave::encode_channel_offer(o) == off);

  Bytes cut_sealed(sealed.begin(), sealed.end() - 3);
  CHECK_THROWS_AS((void)enclave::decode_sealed_state(cut_sealed), Error);
  Bytes cut_att(att.begin(), att.end() - 3);
  CHECK_THROWS_AS((void)enclave::decode_attestation(cut_att), Error);
  Bytes cut_bundle(bundle.begin(), bundle.end() - 3);
  CHECK_THROWS_AS((void)enclave::decode_deploy_bundle(cut_bundle), Error);
  Bytes cut_off(off.begin(), off.end() - 3);
  CHECK_THROWS_AS((void)enclave::decode_channel_offer(cut_off), Error);
}
