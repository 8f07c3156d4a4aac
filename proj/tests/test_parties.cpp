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

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "fairtrace/bytes.hpp"
#include "fairtrace/contract.hpp"
#include "fairtrace/enclave.hpp"
#include "fairtrace/errors.hpp"
#include "fairtrace/fbs.hpp"
#include "fairtrace/ledger.hpp"
#include "fairtrace/parties.hpp"
#include "fairtrace/rng.hpp"
#include "fairtrace/transport.hpp"

namespace {

using namespace fairtrace;
using contract::Op;
using group::Backend;
using group::Group;
using group::GroupElement;
using transport::Conn;
using transport::Message;

std::string temp_path(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / "fairtrace-party-tests";
  std::filesystem::create_directories(dir);
  auto path = dir / (tag + ".chain");
  std::filesystem::remove(path);
  return path.string();
}

std::string error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

// A complete deployment: platform, chain, deployed and registered tracing
// contract, and the three services.
struct World {
  DrbgRng rng;
  enclave::Platform platform;
  ledger::Ledger chain;
  fbs::IssuerKey ik;
  fbs::IssuerPublic ipub;
  Bytes issuer_id = to_bytes("issuer-identity-key");
  Bytes verifier_id = to_bytes("verifier-identity-key");
  parties::TracingSetup setup;
  std::optional<parties::IssuerActor> issuer;
  std::optional<parties::VerifierActor> verifier;
  std::optional<parties::NodeActor> node;

  World(const std::string& name, const std::string& seed = "party-seed",
        std::optional<Bytes> x_t_seed = std::nullopt,
        ledger::Ledger::Config cfg = ledger::Ledger::Config())
      : rng(to_bytes(seed)), platform(Backend::Ec128, rng),
        chain(temp_path(name), platform.manufacturer_public(),
              platform.service_public(), cfg) {
    contract::register_tracing_kind(platform);
    ik = fbs::issuer_keygen(platform.group(), rng);
    ipub = fbs::issuer_public(ik);
    setup = parties::setup_tracing_contract(platform, chain, ipub, issuer_id,
                                            rng, std::move(x_t_seed));
    issuer.emplace(platform.group(), ik, setup.y_t, to_bytes(seed + "/i"));
    verifier.emplace(platform.group(), ipub);
    node.emplace(platform, chain, setup.bundle.contract_id, setup.state);
  }

  const Group& g() const { return platform.group(); }
  const std::string& cid() const { return setup.bundle.contract_id; }

  parties::TracerActor tracer(const Bytes& caller, const std::string& seed) {
    return parties::TracerActor(g(), setup.bundle,
                                platform.manufacturer_public(),
                                platform.service_public(), caller,
                                to_bytes(seed));
  }

  std::size_t tx_count() const {
    std::size_t n = 0;
    for (const auto& b : chain.blocks()) n += b.txs.size();
    return n;
  }
};

// Runs an actor's serve loop on an in-process pair until destruction.
template <typename Actor>
struct Service {
  transport::ConnPtr client;
  std::thread th;

  explicit Service(Actor& actor,
                   std::shared_ptr<transport::WireCapture> capture = nullptr) {
    auto [c, s] = transport::make_bus_pair();
    if (capture) {
      c->set_capture(capture);
      s->set_capture(capture);
    }
    client = std::move(c);
    th = std::thread([&actor, srv = std::move(s)] { actor.serve(*srv); });
  }
  ~Service() {
    client->close();
    th.join();
  }
};

// Same, over a loopback TCP socket.
struct TcpService {
  transport::TcpListener listener;
  std::thread th;
  transport::ConnPtr client;

  template <typename Actor>
  explicit TcpService(Actor& actor) : listener(0) {
    th = std::thread([this, &actor] {
      auto conn = listener.accept(5000);
      actor.serve(*conn);
    });
    client = transport::tcp_connect("127.0.0.1", listener.port());
  }
  ~TcpService() {
    client->close();
    th.join();
  }
};

fbs::Credential issue(World& w, Conn& conn, const fbs::UserIdentity& user,
                      const std::string& message, Rng& rng) {
  return parties::run_issuance(conn, w.g(), w.ipub, w.setup.y_t, user,
                               to_bytes(message), rng);
}

GroupElement only_session_element(World& w) {
  auto entries = w.issuer->registry().entries();
  REQUIRE(entries.size() == 1);
  return w.g().decode(entries[0].first);
}

bool contains(BytesView hay, BytesView needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) !=
         hay.end();
}

// Checks for both the raw serialization and its wire hex form.
bool leaks(BytesView hay, BytesView value) {
  return contains(hay, value) ||
         contains(hay, to_bytes(hex_encode(value)));
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  return Bytes(raw.begin(), raw.end());
}

}  // namespace

TEST_CASE("issuance stays off the chain and lands in the registry") {
  World w("issue");
  Service is(*w.issuer);
  DrbgRng urng(to_bytes("user-issue"));
  auto alice = fbs::user_keygen(w.g(), "alice", urng);

  std::size_t before = w.tx_count();
  auto cred = issue(w, *is.client, alice, "first message", urng);
  CHECK(fbs::verify_sig(w.g(), w.ipub, cred));
  CHECK(w.issuer->registry().size() == 1);
  CHECK(w.tx_count() == before);

  auto again = issue(w, *is.client, alice, "second message", urng);
  CHECK(fbs::verify_sig(w.g(), w.ipub, again));
  CHECK(w.issuer->registry().size() == 2);
  CHECK(w.tx_count() == before);
}

TEST_CASE("an abandoned issuing session dies with its connection") {
  World w("abort");
  DrbgRng urng(to_bytes("user-abort"));
  auto bob = fbs::user_keygen(w.g(), "bob", urng);

  {
    auto [c, s] = transport::make_bus_pair();
    std::thread th([&w, srv = std::move(s)] { w.issuer->serve(*srv); });
    auto [msg1, us] = fbs::user_start(w.g(), bob, w.ipub, w.setup.y_t, urng);
    Message m1{parties::kIssue1, "sess-abort"};
    m1.payload["msg1"] = hex_encode(fbs::encode_msg1(w.g(), msg1));
    m1.payload["xi"] = hex_encode(w.g().encode(bob.xi));
    m1.payload["label"] = bob.label;
    Message r2 = c->request(m1);
    CHECK(r2.type == parties::kIssue2);
    CHECK(w.issuer->pending_sessions() == 1);
    c->close();
    th.join();
  }
  CHECK(w.issuer->pending_sessions() == 0);
  CHECK(w.issuer->registry().size() == 0);

  // The issuer remains serviceable afterwards.
  Service is(*w.issuer);
  auto cred = issue(w, *is.client, bob, "after the abort", urng);
  CHECK(fbs::verify_sig(w.g(), w.ipub, cred));
  CHECK(w.issuer->registry().size() == 1);
}

TEST_CASE("verification is a pure wire exchange") {
  World w("verify");
  Service is(*w.issuer);
  Service vs(*w.verifier);
  DrbgRng urng(to_bytes("user-verify"));
  auto carol = fbs::user_keygen(w.g(), "carol", urng);
  auto cred = issue(w, *is.client, carol, "to verify", urng);

  std::size_t before = w.tx_count();
  CHECK(parties::run_verification(*vs.client, w.g(), cred));

  auto tampered = cred;
  tampered.m.push_back('!');
  CHECK_FALSE(parties::run_verification(*vs.client, w.g(), tampered));

  // Multi-show: the same credential convinces an independent verifier.
  parties::VerifierActor other(w.g(), w.ipub);
  Service vs2(other);
  CHECK(parties::run_verification(*vs2.client, w.g(), cred));
  CHECK(w.tx_count() == before);
}

TEST_CASE("credential tracing links the shown credential to its session") {
  World w("trace-cred");
  Service is(*w.issuer);
  Service ns(*w.node);
  DrbgRng urng(to_bytes("user-trace"));
  auto dave = fbs::user_keygen(w.g(), "dave", urng);
  auto cred = issue(w, *is.client, dave, "traceable", urng);
  auto session_el = only_session_element(w);

  auto tracer = w.tracer(w.issuer_id, "tracer-cred");
  std::size_t before = w.tx_count();
  auto res = parties::run_trace_credential(tracer, *ns.client, session_el);
  CHECK(res.zeta1 == cred.zeta1);
  CHECK(fbs::match_sig(w.g(), w.ipub, cred, res.zeta1));
  CHECK(res.meter_delta == 1);
  CHECK(res.receipt.depth >= w.chain.config().confirmation_depth);
  CHECK(w.tx_count() == before + 1);

  // Determinism plus audit-trail growth on repetition.
  auto res2 = parties::run_trace_credential(tracer, *ns.client, session_el);
  CHECK(res2.zeta1 == res.zeta1);
  CHECK(w.tx_count() == before + 2);
}

TEST_CASE("identity tracing resolves the session and label") {
  World w("trace-id");
  Service is(*w.issuer);
  Service ns(*w.node);
  DrbgRng urng(to_bytes("user-identity"));
  auto erin = fbs::user_keygen(w.g(), "erin", urng);
  auto cred = issue(w, *is.client, erin, "identify me", urng);
  auto session_el = only_session_element(w);

  auto tracer = w.tracer(w.issuer_id, "tracer-id");
  auto res = parties::run_trace_identity(tracer, *ns.client, cred.zeta1,
                                         w.issuer->registry());
  CHECK(res.label == "erin");
  CHECK(fbs::match_id(res.session_element, session_el));

  SUBCASE("a stranger element is surfaced but still audited") {
    DrbgRng srng(to_bytes("stray"));
    GroupElement stray = w.g().random_element(srng);
    std::size_t before = w.tx_count();
    CHECK(error_code([&] {
            (void)parties::run_trace_identity(tracer, *ns.client, stray,
                                              w.issuer->registry());
          }) == "unknown-session");
    CHECK(w.tx_count() == before + 1);
  }
}

TEST_CASE("batch tracing equals single traces in one transaction") {
  World w("batch");
  Service is(*w.issuer);
  Service ns(*w.node);
  DrbgRng urng(to_bytes("user-batch"));
  std::vector<fbs::Credential> creds;
  std::vector<std::string> labels = {"u1", "u2", "u3"};
  for (const auto& label : labels) {
    auto user = fbs::user_keygen(w.g(), label, urng);
    creds.push_back(issue(w, *is.client, user, "batch " + label, urng));
  }

  auto tracer = w.tracer(w.issuer_id, "tracer-batch");
  std::vector<GroupElement> zetas = {creds[0].zeta1, creds[1].zeta1,
                                     creds[2].zeta1};

  std::vector<GroupElement> singles;
  for (const auto& z : zetas) {
    auto resp = tracer.trace(*ns.client, Op::kTraceIdentity,
                             {w.g().encode(z)});
    singles.push_back(w.g().decode(resp.entries[0].second));
  }

  std::size_t before = w.tx_count();
  auto batch =
      parties::run_batch_trace(tracer, *ns.client, Op::kBatchIdentity, zetas);
  CHECK(w.tx_count() == before + 1);
  REQUIRE(batch.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(batch.entries[i].first == zetas[i]);
    CHECK(batch.entries[i].second == singles[i]);
    auto entry = w.issuer->registry().lookup(w.g(), batch.entries[i].second);
    REQUIRE(entry.has_value());
    CHECK(entry->label == labels[i]);
  }
}

TEST_CASE("trace payloads cross the wire sealed only") {
  Bytes x_t_enc(32, 0x07);
  World w("sealed", "sealed-seed", x_t_enc);
  Service is(*w.issuer);
  auto capture = std::make_shared<transport::WireCapture>();
  Service ns(*w.node, capture);
  DrbgRng urng(to_bytes("user-sealed"));
  auto frank = fbs::user_keygen(w.g(), "frank", urng);
  auto cred = issue(w, *is.client, frank, "sealed run", urng);
  auto session_el = only_session_element(w);

  auto tracer = w.tracer(w.issuer_id, "tracer-sealed");
  auto res = parties::run_trace_credential(tracer, *ns.client, session_el);
  auto idres = parties::run_trace_identity(tracer, *ns.client, cred.zeta1,
                                           w.issuer->registry());
  CHECK(res.zeta1 == cred.zeta1);
  CHECK(idres.label == "frank");

  Bytes wire = capture->bytes();
  CHECK(capture->frame_count() >= 8);
  CHECK_FALSE(leaks(wire, x_t_enc));
  CHECK_FALSE(leaks(wire, w.g().encode(session_el)));
  CHECK_FALSE(leaks(wire, w.g().encode(cred.zeta1)));
  CHECK_FALSE(leaks(wire, to_bytes("FTCS1")));

  Bytes chain_bytes = read_file(w.chain.file_path());
  REQUIRE_FALSE(chain_bytes.empty());
  CHECK_FALSE(leaks(chain_bytes, x_t_enc));
  CHECK_FALSE(leaks(chain_bytes, w.g().encode(session_el)));
  CHECK_FALSE(leaks(chain_bytes, w.g().encode(cred.zeta1)));
  CHECK_FALSE(leaks(chain_bytes, to_bytes("FTCS1")));
}

TEST_CASE("inspection reports the audited window faithfully") {
  World w("inspect");
  Service is(*w.issuer);
  Service ns(*w.node);
  DrbgRng urng(to_bytes("user-inspect"));
  auto grace = fbs::user_keygen(w.g(), "grace", urng);
  auto cred = issue(w, *is.client, grace, "audited", urng);
  auto session_el = only_session_element(w);

  auto tracer = w.tracer(w.issuer_id, "tracer-inspect");
  (void)parties::run_trace_credential(tracer, *ns.client, session_el);
  (void)parties::run_trace_credential(tracer, *ns.client, session_el);
  (void)parties::run_trace_identity(tracer, *ns.client, cred.zeta1,
                                    w.issuer->registry());

  parties::InspectionPolicy policy;
  policy.tracer_allowlist = {w.issuer_id, w.verifier_id};
  auto report = parties::run_inspection(w.chain, w.cid(), 0,
                                        w.chain.tip_height(), policy);
  CHECK(report.entries.size() == 3);
  CHECK(report.count_by_kind["trace-credential"] == 2);
  CHECK(report.count_by_kind["trace-identity"] == 1);
  CHECK(report.count_by_caller[hex_encode(w.issuer_id)] == 3);
  CHECK(report.anomalies.empty());
  CHECK(report.chain_ok);

  // Entries mirror the ledger query exactly.
  std::vector<Bytes> query_ids;
  for (const auto& rec : w.chain.query_by_contract(w.cid())) {
    if (rec.tx.kind == ledger::TxKind::kTraceCredential ||
        rec.tx.kind == ledger::TxKind::kTraceIdentity ||
        rec.tx.kind == ledger::TxKind::kBatch) {
      query_ids.push_back(rec.txid);
    }
  }
  REQUIRE(query_ids.size() == report.entries.size());
  for (std::size_t i = 0; i < query_ids.size(); ++i) {
    CHECK(query_ids[i] == report.entries[i].txid);
  }

  SUBCASE("reports are a pure function of the chain") {
    ledger::Ledger reopened(w.chain.file_path(),
                            w.platform.manufacturer_public(),
                            w.platform.service_public(),
                            ledger::Ledger::Config());
    auto second = parties::run_inspection(reopened, w.cid(), 0,
                                          reopened.tip_height(), policy);
    CHECK(parties::report_to_json(report) == parties::report_to_json(second));
  }

  SUBCASE("the remote inspector returns the same canonical bytes") {
    parties::InspectorActor inspector(w.chain, policy);
    Service insp(inspector);
    std::string remote = parties::run_inspection_remote(
        *insp.client, w.cid(), 0, w.chain.tip_height());
    CHECK(remote == parties::report_to_json(report));
  }

  SUBCASE("a height window narrows the entries") {
    auto narrowed = parties::run_inspection(
        w.chain, w.cid(), report.entries[1].height, report.entries[1].height,
        policy);
    CHECK(narrowed.entries.size() == 1);
    CHECK(narrowed.entries[0].txid == report.entries[1].txid);
  }
}

TEST_CASE("inspection rules flag misuse") {
  World w("rules");
  Service is(*w.issuer);
  Service ns(*w.node);
  DrbgRng urng(to_bytes("user-rules"));
  auto heidi = fbs::user_keygen(w.g(), "heidi", urng);
  auto cred = issue(w, *is.client, heidi, "ruled", urng);
  auto session_el = only_session_element(w);

  auto insider = w.tracer(w.issuer_id, "tracer-insider");
  auto outsider = w.tracer(to_bytes("mallory"), "tracer-outsider");
  for (int i = 0; i < 3; ++i) {
    (void)parties::run_trace_credential(insider, *ns.client, session_el);
  }
  (void)parties::run_trace_credential(outsider, *ns.client, session_el);

  parties::InspectionPolicy policy;
  policy.tracer_allowlist = {w.issuer_id, w.verifier_id};

  auto has_rule = [](const parties::AuditReport& r, const std::string& rule,
                     const Bytes& caller) {
    for (const auto& a : r.anomalies) {
      if (a.rule == rule && a.caller == caller) return true;
    }
    return false;
  };

  SUBCASE("rule a: caller off the allowlist") {
    auto report = parties::run_inspection(w.chain, w.cid(), 0,
                                          w.chain.tip_height(), policy);
    CHECK(report.anomalies.size() == 1);
    CHECK(has_rule(report, "a", to_bytes("mallory")));
  }

  SUBCASE("rule b: rate over threshold within the window") {
    policy.rate_threshold = 2;
    auto report = parties::run_inspection(w.chain, w.cid(), 0,
                                          w.chain.tip_height(), policy);
    CHECK(has_rule(report, "b", w.issuer_id));
    CHECK_FALSE(has_rule(report, "b", to_bytes("mallory")));
  }

  SUBCASE("rule c: traces outside the permitted time window") {
    policy.permitted_from_ms = 1;
    auto report = parties::run_inspection(w.chain, w.cid(), 0,
                                          w.chain.tip_height(), policy);
    CHECK(has_rule(report, "c", w.issuer_id));
    CHECK(has_rule(report, "c", to_bytes("mallory")));
  }

  SUBCASE("rule d: chain mutation is detected and located") {
    std::string path = w.chain.file_path();
    Bytes raw = read_file(path);
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(static_cast<std::streamoff>(raw.size() / 2));
    char byte = static_cast<char>(raw[raw.size() / 2] ^ 0x01);
    f.put(byte);
    f.close();
    auto report = parties::run_inspection(w.chain, w.cid(), 0,
                                          w.chain.tip_height(), policy);
    CHECK_FALSE(report.chain_ok);
    bool found = false;
    for (const auto& a : report.anomalies) {
      if (a.rule == "d") {
        found = true;
        CHECK(a.height == report.first_bad_height);
      }
    }
    CHECK(found);
  }
}

TEST_CASE("bus and tcp flows are byte-equivalent") {
  struct Outcome {
    std::string cred_json;
    Bytes zeta1;
    std::size_t txs = 0;
    std::string report;
  };

  auto flow = [](World& w, Conn& issuer_conn, Conn& verifier_conn,
                 Conn& node_conn) {
    DrbgRng urng(to_bytes("user-equiv"));
    auto ivan = fbs::user_keygen(w.g(), "ivan", urng);
    auto cred = issue(w, issuer_conn, ivan, "equivalence", urng);
    REQUIRE(parties::run_verification(verifier_conn, w.g(), cred));
    auto tracer = w.tracer(w.issuer_id, "tracer-equiv");
    auto session_el = only_session_element(w);
    auto res = parties::run_trace_credential(tracer, node_conn, session_el);

    parties::InspectionPolicy policy;
    policy.tracer_allowlist = {w.issuer_id};
    Outcome out;
    out.cred_json = fbs::credential_to_json(w.g(), cred);
    out.zeta1 = w.g().encode(res.zeta1);
    out.txs = w.tx_count();
    out.report = parties::report_to_json(parties::run_inspection(
        w.chain, w.cid(), 0, w.chain.tip_height(), policy));
    return out;
  };

  Outcome bus;
  {
    World w("equiv-bus", "equiv-seed");
    Service is(*w.issuer);
    Service vs(*w.verifier);
    Service ns(*w.node);
    bus = flow(w, *is.client, *vs.client, *ns.client);
  }
  Outcome tcp;
  {
    World w("equiv-tcp", "equiv-seed");
    TcpService is(*w.issuer);
    TcpService vs(*w.verifier);
    TcpService ns(*w.node);
    tcp = flow(w, *is.client, *vs.client, *ns.client);
  }

  CHECK(bus.cred_json == tcp.cred_json);
  CHECK(bus.zeta1 == tcp.zeta1);
  CHECK(bus.txs == tcp.txs);
  CHECK(bus.report == tcp.report);
}
