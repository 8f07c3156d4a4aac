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

#include "fairtrace/bench.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "fairtrace/contract.hpp"
#include "fairtrace/crypto.hpp"
#include "fairtrace/enclave.hpp"
#include "fairtrace/errors.hpp"
#include "fairtrace/fbs.hpp"
#include "fairtrace/ledger.hpp"
#include "fairtrace/parties.hpp"
#include "json.hpp"

namespace fairtrace::bench {

namespace {

using Clock = std::chrono::steady_clock;
using group::Backend;
using group::Group;

template <typename F>
double mean_seconds_of(std::size_t runs, F&& body) {
  auto t0 = Clock::now();
  for (std::size_t i = 0; i < runs; ++i) {
    body(i);
  }
  std::chrono::duration<double> total = Clock::now() - t0;
  return total.count() / static_cast<double>(runs);
}

}  // namespace

std::vector<BenchRow> run_bench(Backend backend, std::size_t runs,
                                const std::string& chain_path, Rng& rng) {
  if (runs == 0) {
    fail("bad-argument", "bench needs at least one run");
  }

  Group g = Group::setup(128, backend);
  enclave::Platform platform(backend, rng);
  contract::register_tracing_kind(platform);

  std::filesystem::remove(chain_path);
  ledger::Ledger::Config lcfg;
  lcfg.confirmation_depth = 3;
  lcfg.timed = true;
  ledger::Ledger chain(chain_path, platform.manufacturer_public(),
                       platform.service_public(), lcfg);

  auto ik = fbs::issuer_keygen(g, rng);
  auto issuer = fbs::issuer_public(ik);
  auto user = fbs::user_keygen(g, "bench-user", rng);
  auto setup = parties::setup_tracing_contract(platform, chain, issuer,
                                               to_bytes("bench-operator"),
                                               rng);
  const std::string& cid = setup.bundle.contract_id;

  std::vector<BenchRow> rows;

  {
    BenchRow row;
    row.operation = "parameter-generation";
    bool live = true;
    row.mean_seconds = mean_seconds_of(runs, [&](std::size_t) {
      auto key = fbs::issuer_keygen(g, rng);
      live &= !g.is_identity(key.y);
    });
    if (!live) fail("bench-failure", "degenerate issuer key");
    rows.push_back(row);
  }

  fbs::SessionRegistry registry;
  std::vector<fbs::Credential> creds;
  creds.reserve(runs);
  const Bytes msg = to_bytes("bench message");
  {
    BenchRow row;
    row.operation = "credential-issuing";
    row.mean_seconds = mean_seconds_of(runs, [&](std::size_t i) {
      auto [msg1, us] = fbs::user_start(g, user, issuer, setup.y_t, rng);
      auto [msg2, is] = fbs::issuer_session_start(g, ik, setup.y_t, msg1,
                                                  user.xi, user.label, rng);
      auto msg3 = fbs::user_blind(g, us, msg2, msg, rng);
      auto msg4 = fbs::issuer_respond(g, is, ik, msg3, registry, i);
      creds.push_back(fbs::user_finalize(g, us, msg4, msg));
    });
    // Transcript size of the four protocol messages.
    auto [m1, us] = fbs::user_start(g, user, issuer, setup.y_t, rng);
    auto [m2, is] = fbs::issuer_session_start(g, ik, setup.y_t, m1, user.xi,
                                              user.label, rng);
    auto m3 = fbs::user_blind(g, us, m2, msg, rng);
    auto m4 = fbs::issuer_respond(g, is, ik, m3, registry, runs);
    row.payload_bytes = fbs::encode_msg1(g, m1).size() +
                        fbs::encode_msg2(g, m2).size() +
                        fbs::encode_msg3(g, m3).size() +
                        fbs::encode_msg4(g, m4).size();
    rows.push_back(row);
  }

  {
    BenchRow row;
    row.operation = "credential-verifying";
    bool ok = true;
    row.mean_seconds = mean_seconds_of(runs, [&](std::size_t i) {
      ok &= fbs::verify_sig(g, issuer, creds[i % creds.size()]);
    });
    if (!ok) fail("bench-failure", "issued credential failed verification");
    row.payload_bytes = fbs::credential_to_json(g, creds[0]).size();
    rows.push_back(row);
  }

  std::vector<Bytes> session_ids;
  for (const auto& [id, entry] : registry.entries()) {
    session_ids.push_back(id);
  }
  std::vector<Bytes> zeta1s;
  zeta1s.reserve(creds.size());
  for (const auto& cred : creds) {
    zeta1s.push_back(g.encode(cred.zeta1));
  }

  enclave::SealedState state = setup.state;

  // One confirmed on-chain trace: supplies the meter and simulated-latency
  // columns and keeps the chain's contract view in step with the enclave.
  auto chain_trace = [&](contract::Op op, BytesView operand,
                         ledger::TxKind kind, BenchRow& row) {
    Bytes request = contract::make_trace_request(op, operand);
    Bytes input_ct = enclave::seal_contract_input(platform.input_public(cid),
                                                  cid, request, rng);
    row.payload_bytes = input_ct.size();
    auto out = platform.execute(cid, input_ct, state);
    auto session = fbs::tracer_keygen(g, rng);

    ledger::Transaction tx;
    tx.contract_id = cid;
    tx.caller = g.encode(session.tau);
    tx.kind = kind;
    tx.input_ct = input_ct;
    tx.output_ct = out.output_ct;
    tx.state_blob = enclave::encode_sealed_state(out.new_state);
    tx.proof = out.proof;
    tx.submitted_at = chain.now_ms();

    std::uint64_t t0 = chain.now_ms();
    auto receipt = chain.confirm(chain.submit(tx));
    row.latency_seconds =
        static_cast<double>(chain.now_ms() - t0) / 1000.0;

    auto offer = platform.open_channel(cid, session.tau);
    auto channel = enclave::accept_channel(g, offer, session,
                                           platform.enclave_public(cid));
    Bytes sealed =
        platform.release_output(cid, session.tau, out.output_ct, receipt);
    auto plain = channel.open(sealed);
    if (!plain) fail("bench-failure", "release did not authenticate");
    state = out.new_state;
    row.meter_units = contract::parse_response(*plain).meter_delta;
  };

  // Timed repetitions run the identical client path but stay off-chain;
  // the release gate is satisfied at the platform's own depth.
  auto trace_mean = [&](contract::Op op, const std::vector<Bytes>& operands) {
    return mean_seconds_of(runs, [&](std::size_t i) {
      Bytes request =
          contract::make_trace_request(op, operands[i % operands.size()]);
      Bytes input_ct = enclave::seal_contract_input(
          platform.input_public(cid), cid, request, rng);
      auto out = platform.execute(cid, input_ct, state);
      auto session = fbs::tracer_keygen(g, rng);
      auto offer = platform.open_channel(cid, session.tau);
      auto channel = enclave::accept_channel(g, offer, session,
                                             platform.enclave_public(cid));
      enclave::ConfirmationReceipt receipt;
      receipt.txid = crypto::sha256(out.output_ct);
      receipt.depth = platform.config().confirmation_depth;
      Bytes sealed =
          platform.release_output(cid, session.tau, out.output_ct, receipt);
      auto plain = channel.open(sealed);
      if (!plain) fail("bench-failure", "release did not authenticate");
      if (contract::parse_response(*plain).meter_delta != 1) {
        fail("bench-failure", "trace did not meter one unit");
      }
      state = out.new_state;
    });
  };

  BenchRow cred_row;
  cred_row.operation = "credential-tracing";
  BenchRow id_row;
  id_row.operation = "identity-tracing";

  // Both confirmed traces run before the timed repetitions: the off-chain
  // repetitions advance the enclave past the validators' contract view, so
  // no further submission can follow them.
  chain_trace(contract::Op::kTraceCredential, session_ids[0],
              ledger::TxKind::kTraceCredential, cred_row);
  chain_trace(contract::Op::kTraceIdentity, zeta1s[0],
              ledger::TxKind::kTraceIdentity, id_row);
  cred_row.mean_seconds =
      trace_mean(contract::Op::kTraceCredential, session_ids);
  id_row.mean_seconds = trace_mean(contract::Op::kTraceIdentity, zeta1s);

  rows.push_back(cred_row);
  rows.push_back(id_row);
  return rows;
}

std::string bench_to_json(Backend backend, std::size_t runs,
                          const std::vector<BenchRow>& rows) {
  nlohmann::json doc;
  doc["backend"] = backend == Backend::ToyModP ? "toy" : "ec";
  doc["runs"] = runs;
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r;
    r["operation"] = row.operation;
    r["mean_seconds"] = row.mean_seconds;
    r["payload_bytes"] = row.payload_bytes;
    r["meter_units"] = row.meter_units;
    r["latency_seconds"] = row.latency_seconds;
    out.push_back(std::move(r));
  }
  doc["rows"] = std::move(out);
  return doc.dump(2) + "\n";
}

std::string bench_to_text(const std::vector<BenchRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-22s %12s %14s %6s %10s\n",
                "operation", "mean_s", "payload_bytes", "meter", "latency_s");
  out += line;
  for (const auto& row : rows) {
    std::snprintf(line, sizeof(line), "%-22s %12.6f %14llu %6llu %10.1f\n",
                  row.operation.c_str(), row.mean_seconds,
                  static_cast<unsigned long long>(row.payload_bytes),
                  static_cast<unsigned long long>(row.meter_units),
                  row.latency_seconds);
    out += line;
  }
  return out;
}

}  // namespace fairtrace::bench
