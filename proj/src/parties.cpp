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

#include "fairtrace/parties.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "fairtrace/crypto.hpp"
#include "fairtrace/errors.hpp"

namespace fairtrace::parties {
namespace {

Message error_reply(const Message& m, const Error& e) {
  Message r;
  r.type = m.type;
  r.session = m.session;
  r.payload["error"] = e.code();
  r.payload["detail"] = std::string(e.what());
  return r;
}

std::string str_field(const Message& m, const char* key) {
  if (!m.payload.contains(key) || !m.payload[key].is_string()) {
    fail("malformed-message", std::string("missing field ") + key);
  }
  return m.payload[key].get<std::string>();
}

Bytes bytes_field(const Message& m, const char* key) {
  auto decoded = hex_decode(str_field(m, key));
  if (!decoded) {
    fail("malformed-message", std::string("field is not hex: ") + key);
  }
  return *decoded;
}

std::uint64_t u64_field(const Message& m, const char* key) {
  if (!m.payload.contains(key) || !m.payload[key].is_number_unsigned()) {
    fail("malformed-message", std::string("missing field ") + key);
  }
  return m.payload[key].get<std::uint64_t>();
}

// Raises the service-reported error at the client.
void expect_reply(const Message& reply, const char* type) {
  if (reply.payload.contains("error")) {
    std::string code = reply.payload["error"].get<std::string>();
    std::string detail = reply.payload.value("detail", code);
    throw Error(code, detail);
  }
  if (reply.type != type) {
    fail("malformed-message",
         "expected " + std::string(type) + ", got " + reply.type);
  }
}

void serve_loop(Conn& conn,
                const std::function<Message(const Message&)>& handler) {
  for (;;) {
    std::optional<Message> m;
    try {
      m = conn.recv(-1);
    } catch (const Error&) {
      break;
    }
    if (!m) break;
    try {
      conn.send(handler(*m));
    } catch (const Error&) {
      break;
    }
  }
}

}  // namespace

IssuerActor::IssuerActor(const Group& g, fbs::IssuerKey key, GroupElement y_t,
                         BytesView rng_seed)
    : g_(g), key_(std::move(key)), pub_(fbs::issuer_public(key_)),
      y_t_(y_t), rng_(rng_seed) {}

void IssuerActor::serve(Conn& conn) {
  serve_loop(conn, [this](const Message& m) { return handle(m); });
  // The connection is gone; whatever it left half-done is dead.
  std::lock_guard lk(mu_);
  sessions_.clear();
}

Message IssuerActor::handle(const Message& m) {
  try {
    if (m.type == kIssue1) {
      auto msg1 = fbs::decode_msg1(g_, bytes_field(m, "msg1"));
      auto xi = g_.decode(bytes_field(m, "xi"));
      std::string label = str_field(m, "label");
      auto [msg2, session] =
          fbs::issuer_session_start(g_, key_, y_t_, msg1, xi, label, rng_);
      std::lock_guard lk(mu_);
      sessions_.insert_or_assign(m.session, std::move(session));
      Message r{kIssue2, m.session};
      r.payload["msg2"] = hex_encode(fbs::encode_msg2(g_, msg2));
      return r;
    }
    if (m.type == kIssue3) {
      auto msg3 = fbs::decode_msg3(g_, bytes_field(m, "msg3"));
      std::lock_guard lk(mu_);
      auto it = sessions_.find(m.session);
      if (it == sessions_.end()) {
        fail("protocol-error", "no open issuing session " + m.session);
      }
      issue_counter_ += 1;
      auto msg4 = fbs::issuer_respond(g_, it->second, key_, msg3, registry_,
                                      issue_counter_);
      sessions_.erase(it);
      Message r{kIssue4, m.session};
      r.payload["msg4"] = hex_encode(fbs::encode_msg4(g_, msg4));
      return r;
    }
    fail("malformed-message", "issuer cannot handle " + m.type);
  } catch (const Error& e) {
    return error_reply(m, e);
  }
}

std::size_t IssuerActor::pending_sessions() const {
  std::lock_guard lk(mu_);
  return sessions_.size();
}

void VerifierActor::serve(Conn& conn) {
  serve_loop(conn, [this](const Message& m) { return handle(m); });
}

Message VerifierActor::handle(const Message& m) {
  try {
    if (m.type != kShow) {
      fail("malformed-message", "verifier cannot handle " + m.type);
    }
    if (!m.payload.contains("credential") ||
        !m.payload["credential"].is_object()) {
      fail("malformed-message", "missing field credential");
    }
    auto cred =
        fbs::credential_from_json(g_, m.payload["credential"].dump());
    Message r{kShow, m.session};
    r.payload["ok"] = fbs::verify_sig(g_, issuer_, cred);
    return r;
  } catch (const Error& e) {
    return error_reply(m, e);
  }
}

NodeActor::NodeActor(enclave::Platform& platform, ledger::Ledger& chain,
                     std::string contract_id, enclave::SealedState state)
    : platform_(platform), chain_(chain), cid_(std::move(contract_id)),
      state_(std::move(state)) {}

void NodeActor::serve(Conn& conn) {
  serve_loop(conn, [this](const Message& m) { return handle(m); });
}

Message NodeActor::handle(const Message& m) {
  try {
    if (m.type == kTraceReq) {
      auto op = static_cast<Op>(u64_field(m, "op"));
      if (op != Op::kTraceCredential && op != Op::kTraceIdentity &&
          op != Op::kBatchCredential && op != Op::kBatchIdentity) {
        fail("malformed-message", "op is not a trace operation");
      }
      Bytes input_ct = bytes_field(m, "input");
      GroupElement tau = platform_.group().decode(bytes_field(m, "tau"));
      Bytes caller = bytes_field(m, "caller");

      std::lock_guard lk(mu_);
      auto out = platform_.execute(cid_, input_ct, state_);
      ledger::Transaction tx;
      tx.contract_id = cid_;
      tx.caller = caller;
      tx.kind = op == Op::kTraceCredential ? ledger::TxKind::kTraceCredential
                : op == Op::kTraceIdentity ? ledger::TxKind::kTraceIdentity
                                           : ledger::TxKind::kBatch;
      tx.input_ct = input_ct;
      tx.output_ct = out.output_ct;
      tx.state_blob = enclave::encode_sealed_state(out.new_state);
      tx.proof = out.proof;
      tx.submitted_at = chain_.now_ms();
      Bytes txid = chain_.submit(tx);
      state_ = out.new_state;

      auto offer = platform_.open_channel(cid_, tau);
      pending_[hex_encode(txid)] = PendingRelease{tau, out.output_ct};

      Message r{kTraceResult, m.session};
      r.payload["stage"] = "submitted";
      r.payload["txid"] = hex_encode(txid);
      r.payload["offer"] = hex_encode(enclave::encode_channel_offer(offer));
      return r;
    }
    if (m.type == kTraceAck) {
      std::string txid_hex = str_field(m, "txid");
      PendingRelease p;
      {
        std::lock_guard lk(mu_);
        auto it = pending_.find(txid_hex);
        if (it == pending_.end()) {
          fail("unknown-output", "no pending release for " + txid_hex);
        }
        p = it->second;
      }
      auto txid = hex_decode(txid_hex);
      auto receipt = chain_.confirm(*txid);
      Bytes sealed =
          platform_.release_output(cid_, p.tau, p.output_ct, receipt);
      {
        std::lock_guard lk(mu_);
        pending_.erase(txid_hex);
      }
      Message r{kTraceResult, m.session};
      r.payload["stage"] = "released";
      r.payload["txid"] = txid_hex;
      r.payload["height"] = receipt.height;
      r.payload["depth"] = receipt.depth;
      r.payload["sealed"] = hex_encode(sealed);
      return r;
    }
    fail("malformed-message", "node cannot handle " + m.type);
  } catch (const Error& e) {
    return error_reply(m, e);
  }
}

TracerActor::TracerActor(const Group& g, enclave::DeployBundle bundle,
                         BytesView manufacturer_public,
                         BytesView service_public, Bytes caller,
                         BytesView rng_seed)
    : g_(g), bundle_(std::move(bundle)), caller_(std::move(caller)),
      rng_(rng_seed) {
  if (!enclave::validate_deploy_bundle(bundle_, manufacturer_public,
                                       service_public)) {
    fail("bad-attestation", "refusing to trace against an unproven contract");
  }
}

contract::TraceResponse TracerActor::trace(Conn& node, Op op,
                                           const std::vector<Bytes>& operands,
                                           ConfirmationReceipt* receipt) {
  Bytes request;
  if (op == Op::kTraceCredential || op == Op::kTraceIdentity) {
    if (operands.size() != 1) {
      fail("malformed-frame", "single trace takes exactly one operand");
    }
    request = contract::make_trace_request(op, operands[0]);
  } else {
    request = contract::make_batch_request(op, operands);
  }

  auto session = fbs::tracer_keygen(g_, rng_);
  Bytes input_ct = enclave::seal_contract_input(
      bundle_.attestation.input_public, bundle_.contract_id, request, rng_);

  Message req{kTraceReq, hex_encode(rng_.bytes(8))};
  req.payload["op"] = static_cast<std::uint64_t>(op);
  req.payload["input"] = hex_encode(input_ct);
  req.payload["tau"] = hex_encode(g_.encode(session.tau));
  req.payload["caller"] = hex_encode(caller_);
  Message submitted = node.request(req);
  expect_reply(submitted, kTraceResult);
  if (str_field(submitted, "stage") != "submitted") {
    fail("malformed-message", "unexpected trace stage");
  }
  std::string txid_hex = str_field(submitted, "txid");

  auto offer = enclave::decode_channel_offer(bytes_field(submitted, "offer"));
  auto channel = enclave::accept_channel(g_, offer, session,
                                         bundle_.attestation.enclave_public);

  Message ack{kTraceAck, req.session};
  ack.payload["txid"] = txid_hex;
  Message released = node.request(ack);
  expect_reply(released, kTraceResult);
  if (str_field(released, "stage") != "released") {
    fail("malformed-message", "unexpected trace stage");
  }

  auto plaintext = channel.open(bytes_field(released, "sealed"));
  if (!plaintext) {
    fail("channel-failure", "release did not authenticate on the channel");
  }
  if (receipt) {
    receipt->txid = *hex_decode(txid_hex);
    receipt->height = u64_field(released, "height");
    receipt->depth = u64_field(released, "depth");
  }
  return contract::parse_response(*plaintext);
}

AuditReport run_inspection(const ledger::Ledger& chain,
                           const std::string& contract_id,
                           std::uint64_t from_height, std::uint64_t to_height,
                           const InspectionPolicy& policy) {
  AuditReport report;
  report.contract_id = contract_id;
  report.window_from = from_height;
  report.window_to = to_height;

  for (const auto& rec : chain.query_by_contract(contract_id)) {
    if (rec.height < from_height || rec.height > to_height) continue;
    auto kind = rec.tx.kind;
    if (kind != ledger::TxKind::kTraceCredential &&
        kind != ledger::TxKind::kTraceIdentity &&
        kind != ledger::TxKind::kBatch) {
      continue;
    }
    AuditEntry e;
    e.txid = rec.txid;
    e.height = rec.height;
    e.contract_id = contract_id;
    e.kind = kind;
    e.caller = rec.tx.caller;
    e.timestamp = rec.block_time;
    report.count_by_kind[ledger::tx_kind_name(kind)] += 1;
    report.count_by_caller[hex_encode(e.caller)] += 1;
    report.entries.push_back(std::move(e));
  }

  // Rule (a): callers outside the tracer allowlist.
  std::set<Bytes> allow(policy.tracer_allowlist.begin(),
                        policy.tracer_allowlist.end());
  std::map<Bytes, std::pair<std::uint64_t, std::uint64_t>> strangers;
  for (const auto& e : report.entries) {
    if (allow.count(e.caller) != 0) continue;
    auto [it, fresh] = strangers.try_emplace(e.caller, 0, e.height);
    it->second.first += 1;
    (void)fresh;
  }
  for (const auto& [caller, info] : strangers) {
    report.anomalies.push_back(Anomaly{
        "a", caller, info.second,
        std::to_string(info.first) +
            " trace transaction(s) from a caller not on the allowlist"});
  }

  // Rule (b): per-caller rate within any window of the configured width.
  std::map<Bytes, std::vector<std::uint64_t>> heights;
  for (const auto& e : report.entries) heights[e.caller].push_back(e.height);
  for (const auto& [caller, hs] : heights) {
    std::uint64_t worst = 0;
    std::uint64_t worst_start = 0;
    std::size_t lo = 0;
    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
      while (hs[hi] - hs[lo] >= policy.rate_window_blocks) lo += 1;
      std::uint64_t count = hi - lo + 1;
      if (count > worst) {
        worst = count;
        worst_start = hs[lo];
      }
    }
    if (worst > policy.rate_threshold) {
      report.anomalies.push_back(Anomaly{
          "b", caller, worst_start,
          std::to_string(worst) + " traces within " +
              std::to_string(policy.rate_window_blocks) +
              " blocks exceeds the allowed " +
              std::to_string(policy.rate_threshold)});
    }
  }

  // Rule (c): traces outside the permitted time window.
  if (policy.permitted_from_ms || policy.permitted_to_ms) {
    std::map<Bytes, std::pair<std::uint64_t, std::uint64_t>> late;
    for (const auto& e : report.entries) {
      bool outside =
          (policy.permitted_from_ms && e.timestamp < *policy.permitted_from_ms) ||
          (policy.permitted_to_ms && e.timestamp > *policy.permitted_to_ms);
      if (!outside) continue;
      auto [it, fresh] = late.try_emplace(e.caller, 0, e.height);
      it->second.first += 1;
      (void)fresh;
    }
    for (const auto& [caller, info] : late) {
      report.anomalies.push_back(Anomaly{
          "c", caller, info.second,
          std::to_string(info.first) +
              " trace(s) outside the permitted time window"});
    }
  }

  // Rule (d): ledger integrity.
  auto check = chain.verify_chain();
  report.chain_ok = check.ok;
  report.first_bad_height = check.first_bad_height;
  if (!check.ok) {
    report.anomalies.push_back(Anomaly{
        "d", Bytes{}, check.first_bad_height,
        "chain integrity check failed at height " +
            std::to_string(check.first_bad_height)});
  }
  return report;
}

std::string report_to_json(const AuditReport& report) {
  nlohmann::json j;
  j["contract_id"] = report.contract_id;
  j["window"] = {{"from", report.window_from}, {"to", report.window_to}};
  auto entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"txid", hex_encode(e.txid)},
                       {"height", e.height},
                       {"contract_id", e.contract_id},
                       {"kind", ledger::tx_kind_name(e.kind)},
                       {"caller", hex_encode(e.caller)},
                       {"timestamp", e.timestamp}});
  }
  j["entries"] = std::move(entries);
  j["summary"] = {{"by_kind", report.count_by_kind},
                  {"by_caller", report.count_by_caller}};
  auto anomalies = nlohmann::json::array();
  for (const auto& a : report.anomalies) {
    anomalies.push_back({{"rule", a.rule},
                         {"caller", hex_encode(a.caller)},
                         {"height", a.height},
                         {"detail", a.detail}});
  }
  j["anomalies"] = std::move(anomalies);
  j["chain"] = {{"ok", report.chain_ok},
                {"first_bad_height", report.first_bad_height}};
  return j.dump();
}

void InspectorActor::serve(Conn& conn) {
  serve_loop(conn, [this](const Message& m) { return handle(m); });
}

Message InspectorActor::handle(const Message& m) {
  try {
    if (m.type != kInspectReq) {
      fail("malformed-message", "inspector cannot handle " + m.type);
    }
    auto report = run_inspection(chain_, str_field(m, "contract"),
                                 u64_field(m, "from"), u64_field(m, "to"),
                                 policy_);
    Message r{kInspectReport, m.session};
    r.payload["report"] = report_to_json(report);
    return r;
  } catch (const Error& e) {
    return error_reply(m, e);
  }
}

fbs::Credential run_issuance(Conn& issuer, const Group& g,
                             const fbs::IssuerPublic& issuer_pub,
                             const GroupElement& y_t,
                             const fbs::UserIdentity& user, BytesView m,
                             Rng& rng) {
  auto [msg1, us] = fbs::user_start(g, user, issuer_pub, y_t, rng);
  Message m1{kIssue1, hex_encode(rng.bytes(8))};
  m1.payload["msg1"] = hex_encode(fbs::encode_msg1(g, msg1));
  m1.payload["xi"] = hex_encode(g.encode(user.xi));
  m1.payload["label"] = user.label;
  Message r2 = issuer.request(m1);
  expect_reply(r2, kIssue2);
  auto msg2 = fbs::decode_msg2(g, bytes_field(r2, "msg2"));

  auto msg3 = fbs::user_blind(g, us, msg2, m, rng);
  Message m3{kIssue3, m1.session};
  m3.payload["msg3"] = hex_encode(fbs::encode_msg3(g, msg3));
  Message r4 = issuer.request(m3);
  expect_reply(r4, kIssue4);
  auto msg4 = fbs::decode_msg4(g, bytes_field(r4, "msg4"));

  return fbs::user_finalize(g, us, msg4, m);
}

bool run_verification(Conn& verifier, const Group& g,
                      const fbs::Credential& cred) {
  Message show{kShow, "show"};
  show.payload["credential"] =
      nlohmann::json::parse(fbs::credential_to_json(g, cred));
  Message reply = verifier.request(show);
  expect_reply(reply, kShow);
  if (!reply.payload.contains("ok") || !reply.payload["ok"].is_boolean()) {
    fail("malformed-message", "missing field ok");
  }
  return reply.payload["ok"].get<bool>();
}

CredentialTraceResult run_trace_credential(
    TracerActor& tracer, Conn& node, const GroupElement& session_element) {
  const Group& g = tracer.group();
  ConfirmationReceipt receipt;
  auto resp = tracer.trace(node, Op::kTraceCredential,
                           {g.encode(session_element)}, &receipt);
  if (resp.entries.size() != 1) {
    fail("malformed-frame", "trace response entry count mismatch");
  }
  return CredentialTraceResult{g.decode(resp.entries[0].second), receipt,
                               resp.meter_delta};
}

IdentityTraceResult run_trace_identity(TracerActor& tracer, Conn& node,
                                       const GroupElement& zeta1,
                                       const fbs::SessionRegistry& registry) {
  const Group& g = tracer.group();
  ConfirmationReceipt receipt;
  auto resp =
      tracer.trace(node, Op::kTraceIdentity, {g.encode(zeta1)}, &receipt);
  if (resp.entries.size() != 1) {
    fail("malformed-frame", "trace response entry count mismatch");
  }
  GroupElement element = g.decode(resp.entries[0].second);
  auto entry = registry.lookup(g, element);
  if (!entry) {
    fail("unknown-session",
         "traced element is not in the issuer registry; transaction " +
             hex_encode(receipt.txid) + " remains on the ledger");
  }
  return IdentityTraceResult{element, entry->label, receipt};
}

BatchTraceResult run_batch_trace(TracerActor& tracer, Conn& node, Op op,
                                 const std::vector<GroupElement>& operands) {
  const Group& g = tracer.group();
  std::vector<Bytes> encoded;
  encoded.reserve(operands.size());
  for (const auto& el : operands) encoded.push_back(g.encode(el));
  ConfirmationReceipt receipt;
  auto resp = tracer.trace(node, op, encoded, &receipt);
  BatchTraceResult result;
  result.receipt = receipt;
  result.entries.reserve(resp.entries.size());
  for (const auto& [operand, traced] : resp.entries) {
    result.entries.emplace_back(g.decode(operand), g.decode(traced));
  }
  return result;
}

std::string run_inspection_remote(Conn& inspector,
                                  const std::string& contract_id,
                                  std::uint64_t from_height,
                                  std::uint64_t to_height) {
  Message req{kInspectReq, "inspect"};
  req.payload["contract"] = contract_id;
  req.payload["from"] = from_height;
  req.payload["to"] = to_height;
  Message reply = inspector.request(req);
  expect_reply(reply, kInspectReport);
  return str_field(reply, "report");
}

TracingSetup setup_tracing_contract(enclave::Platform& platform,
                                    ledger::Ledger& chain,
                                    const fbs::IssuerPublic& issuer,
                                    const Bytes& deployer, Rng& rng,
                                    std::optional<Bytes> x_t_seed) {
  const Group& g = platform.group();
  TracingSetup setup;
  setup.bundle = platform.deploy_contract(
      contract::kTracingKind, contract::make_init_params(g, issuer));
  const std::string& cid = setup.bundle.contract_id;

  ledger::Transaction deploy;
  deploy.contract_id = cid;
  deploy.caller = deployer;
  deploy.kind = ledger::TxKind::kDeploy;
  deploy.state_blob = enclave::encode_deploy_bundle(setup.bundle);
  deploy.submitted_at = chain.now_ms();
  (void)chain.confirm(chain.submit(deploy));

  Bytes request = x_t_seed ? contract::make_register_request_seeded(*x_t_seed)
                           : contract::make_register_request();
  Bytes input_ct = enclave::seal_contract_input(platform.input_public(cid),
                                                cid, request, rng);
  auto out = platform.execute(cid, input_ct, setup.bundle.state_init);

  ledger::Transaction reg;
  reg.contract_id = cid;
  reg.caller = deployer;
  reg.kind = ledger::TxKind::kRegister;
  reg.input_ct = input_ct;
  reg.output_ct = out.output_ct;
  reg.state_blob = enclave::encode_sealed_state(out.new_state);
  reg.proof = out.proof;
  reg.submitted_at = chain.now_ms();
  auto receipt = chain.confirm(chain.submit(reg));

  // The tracing parameter comes back through the same confirmed-release
  // path every other output takes.
  auto session = fbs::tracer_keygen(g, rng);
  auto offer = platform.open_channel(cid, session.tau);
  auto channel = enclave::accept_channel(g, offer, session,
                                         platform.enclave_public(cid));
  Bytes sealed =
      platform.release_output(cid, session.tau, out.output_ct, receipt);
  auto plaintext = channel.open(sealed);
  if (!plaintext) {
    fail("channel-failure", "registration release did not authenticate");
  }
  auto resp = contract::parse_response(*plaintext);
  setup.y_t = g.decode(resp.param_public);
  setup.state = out.new_state;
  return setup;
}

enclave::SealedState latest_contract_state(const ledger::Ledger& chain,
                                           const std::string& contract_id,
                                           const enclave::DeployBundle&
                                               bundle) {
  auto records = chain.query_by_contract(contract_id);
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->tx.kind != ledger::TxKind::kDeploy &&
        !it->tx.state_blob.empty()) {
      return enclave::decode_sealed_state(it->tx.state_blob);
    }
  }
  return bundle.state_init;
}

}  // namespace fairtrace::parties
