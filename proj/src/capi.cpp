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

#include "fairtrace.h"

#include <unistd.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <thread>

#include "fairtrace/bench.hpp"
#include "fairtrace/bytes.hpp"
#include "fairtrace/contract.hpp"
#include "fairtrace/enclave.hpp"
#include "fairtrace/errors.hpp"
#include "fairtrace/fbs.hpp"
#include "fairtrace/group.hpp"
#include "fairtrace/ledger.hpp"
#include "fairtrace/parties.hpp"
#include "fairtrace/rng.hpp"
#include "fairtrace/store.hpp"
#include "fairtrace/transport.hpp"
#include "json.hpp"

using namespace fairtrace;
using group::Backend;
using group::Group;
using group::GroupElement;
using nlohmann::json;

struct ft_ctx {
  std::string home;
  std::string backend;  // "" until resolved against the home config
  std::string last_error;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int class_of(const std::string& code) {
  if (code == "bad-argument") return FT_ERR_USAGE;
  if (code == "io-error" || code == "malformed-file") return FT_ERR_IO;
  if (code == "not-setup" || code == "not-registered") return FT_ERR_STATE;
  if (code == "corrupt-ledger" || code == "malformed-tx" ||
      code == "invalid-proof" || code == "invalid-attestation" ||
      code == "unconfirmed-transaction") {
    return FT_ERR_LEDGER;
  }
  return FT_ERR_PROTOCOL;
}

template <typename F>
int wrap(ft_ctx* ctx, F&& body) {
  if (!ctx) return FT_ERR_USAGE;
  try {
    body();
    ctx->last_error.clear();
    return FT_OK;
  } catch (const Error& e) {
    ctx->last_error = e.what();
    return class_of(e.code());
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return FT_ERR_INTERNAL;
  }
}

std::string resolve_backend_name(const ft_ctx* ctx,
                                 const store::Paths& paths) {
  std::string configured;
  if (store::file_exists(paths.config())) {
    configured =
        store::config_from_json(store::read_text_file(paths.config()))
            .backend;
  }
  if (ctx->backend.empty()) {
    return configured.empty() ? "ec" : configured;
  }
  if (ctx->backend != "ec" && ctx->backend != "toy") {
    fail("bad-argument", "backend must be \"ec\" or \"toy\"");
  }
  if (!configured.empty() && configured != ctx->backend) {
    fail("bad-argument", "backend " + ctx->backend +
                             " conflicts with home configured for " +
                             configured);
  }
  return ctx->backend;
}

Backend backend_of(const std::string& name) {
  return name == "toy" ? Backend::ToyModP : Backend::Ec128;
}

struct LoadedHome {
  store::Paths paths;
  store::HomeConfig cfg;
  Group g;
};

LoadedHome load_home(ft_ctx* ctx) {
  store::Paths paths{ctx->home};
  if (!store::file_exists(paths.config())) {
    fail("not-setup", ctx->home + " is not set up; run setup first");
  }
  auto cfg = store::config_from_json(store::read_text_file(paths.config()));
  if (!ctx->backend.empty() && ctx->backend != cfg.backend) {
    fail("bad-argument", "backend " + ctx->backend +
                             " conflicts with home configured for " +
                             cfg.backend);
  }
  return LoadedHome{paths, cfg, Group::setup(128, backend_of(cfg.backend))};
}

ledger::Ledger::Config ledger_config(const store::HomeConfig& cfg) {
  ledger::Ledger::Config out;
  out.confirmation_depth = cfg.confirmation_depth;
  out.validator_count = cfg.validator_count;
  out.timed = cfg.timed;
  out.block_interval_ms = cfg.block_interval_ms;
  return out;
}

// The platform's private disk, loaded for the duration of one operation.
struct PlatformHandle {
  enclave::Platform platform;

  PlatformHandle(Backend backend, const std::string& path)
      : platform(backend, SystemRng::instance()) {
    contract::register_tracing_kind(platform);
    store::load_platform(path, platform);
  }
};

fbs::IssuerKey require_issuer_key(const Group& g, const store::Paths& paths) {
  if (!store::file_exists(paths.issuer_key())) {
    fail("not-setup", "no issuer key at " + paths.issuer_key() +
                          "; run keygen --role issuer first");
  }
  return store::issuer_key_from_json(
      g, store::read_text_file(paths.issuer_key()));
}

store::ContractInfo require_contract(const Group& g,
                                     const store::Paths& paths) {
  if (!store::file_exists(paths.contract())) {
    fail("not-registered",
         "no tracing contract deployed in " + paths.home);
  }
  return store::contract_info_from_json(
      g, store::read_text_file(paths.contract()));
}

void load_registry(const Group& g, const store::Paths& paths,
                   fbs::SessionRegistry& registry) {
  if (store::file_exists(paths.registry())) {
    store::registry_from_json(g, store::read_text_file(paths.registry()),
                              registry);
  }
}

parties::InspectionPolicy policy_from(const store::HomeConfig& cfg) {
  parties::InspectionPolicy policy;
  policy.tracer_allowlist = {to_bytes("issuer"), to_bytes("verifier")};
  policy.rate_threshold = cfg.rate_threshold;
  policy.rate_window_blocks = cfg.rate_window_blocks;
  return policy;
}

GroupElement decode_element_arg(const Group& g, const char* hex,
                                const char* what) {
  if (!hex) fail("bad-argument", std::string(what) + " is required");
  auto raw = hex_decode(hex);
  if (!raw) fail("bad-argument", std::string(what) + " is not hex");
  return g.decode(*raw);
}

// Everything a trace operation needs: platform, chain, the current contract
// state behind a node service on an in-process pair. The platform's private
// disk is written back even when the trace fails after execution.
struct TraceRig {
  LoadedHome home;
  store::ContractInfo info;
  PlatformHandle ph;
  ledger::Ledger chain;
  parties::NodeActor node;
  transport::ConnPtr client;
  transport::ConnPtr server;
  std::thread server_thread;

  explicit TraceRig(ft_ctx* ctx)
      : home(load_home(ctx)),
        info(require_contract(home.g, home.paths)),
        ph(backend_of(home.cfg.backend), home.paths.platform()),
        chain(home.paths.chain(), ph.platform.manufacturer_public(),
              ph.platform.service_public(), ledger_config(home.cfg)),
        node(ph.platform, chain, info.bundle.contract_id,
             parties::latest_contract_state(chain, info.bundle.contract_id,
                                            info.bundle)) {
    auto pair = transport::make_bus_pair();
    client = std::move(pair.first);
    server = std::move(pair.second);
    server_thread = std::thread([this] { node.serve(*server); });
  }

  parties::TracerActor tracer(const char* caller) {
    return parties::TracerActor(
        home.g, info.bundle, ph.platform.manufacturer_public(),
        ph.platform.service_public(), to_bytes(caller ? caller : "issuer"),
        SystemRng::instance().bytes(32));
  }

  ~TraceRig() {
    client->close();
    if (server_thread.joinable()) server_thread.join();
    try {
      store::save_platform(home.paths.platform(), ph.platform);
    } catch (...) {
    }
  }
};

void put_receipt(json& doc, const enclave::ConfirmationReceipt& receipt) {
  doc["txid"] = hex_encode(receipt.txid);
  doc["height"] = receipt.height;
  doc["depth"] = receipt.depth;
}

std::string demo_chain_path() {
  auto path = std::filesystem::temp_directory_path() /
              ("fairtrace-demo-" + std::to_string(::getpid()) + ".bin");
  return path.string();
}

// One actor behind a loopback TCP listener serving a single connection.
struct DemoService {
  transport::TcpListener listener{0};
  std::thread th;
  transport::ConnPtr conn;

  template <typename Actor>
  void start(Actor& actor) {
    th = std::thread([this, &actor] {
      try {
        auto server = listener.accept();
        if (server) actor.serve(*server);
      } catch (...) {
      }
    });
    conn = transport::tcp_connect("127.0.0.1", listener.port());
  }

  void stop() {
    if (conn) conn->close();
    if (th.joinable()) th.join();
  }
};

std::string run_demo(const std::string& backend_name) {
  std::ostringstream out;
  DrbgRng rng(to_bytes("fairtrace-demo"));
  Backend backend = backend_of(backend_name);

  enclave::Platform platform(backend, rng);
  contract::register_tracing_kind(platform);
  const Group& g = platform.group();

  std::string chain_path = demo_chain_path();
  std::filesystem::remove(chain_path);
  ledger::Ledger chain(chain_path, platform.manufacturer_public(),
                       platform.service_public(), ledger::Ledger::Config());

  auto ik = fbs::issuer_keygen(g, rng);
  auto ipub = fbs::issuer_public(ik);
  out << "demo: " << backend_name << " backend, loopback TCP actors\n";

  auto setup = parties::setup_tracing_contract(platform, chain, ipub,
                                               to_bytes("issuer"), rng);
  const std::string& cid = setup.bundle.contract_id;
  out << "deployed tracing contract " << cid << ", parameter registered"
      << " (chain height " << chain.tip_height() << ")\n";

  parties::IssuerActor issuer_actor(g, ik, setup.y_t,
                                    to_bytes("demo-issuer"));
  parties::VerifierActor verifier_actor(g, ipub);
  parties::NodeActor node_actor(platform, chain, cid, setup.state);
  store::HomeConfig defaults;
  parties::InspectorActor inspector_actor(chain, policy_from(defaults));

  DemoService issuer_svc, verifier_svc, node_svc, inspector_svc;
  issuer_svc.start(issuer_actor);
  verifier_svc.start(verifier_actor);
  node_svc.start(node_actor);
  inspector_svc.start(inspector_actor);

  std::map<std::string, fbs::Credential> creds;
  std::uint64_t height_before = chain.tip_height();
  for (const std::string name : {"alice", "bob", "carol"}) {
    auto user = fbs::user_keygen(g, name, rng);
    creds.emplace(name,
                  parties::run_issuance(*issuer_svc.conn, g, ipub, setup.y_t,
                                        user, to_bytes("demo message"), rng));
    out << "issued credential to " << name << "\n";
  }
  out << "issuance stayed off-chain: height still " << chain.tip_height()
      << " (was " << height_before << ")\n";

  bool shown =
      parties::run_verification(*verifier_svc.conn, g, creds.at("alice"));
  out << "alice showed her credential to the verifier: "
      << (shown ? "accepted" : "rejected") << "\n";

  parties::TracerActor tribunal(g, setup.bundle,
                                platform.manufacturer_public(),
                                platform.service_public(),
                                to_bytes("issuer"), to_bytes("demo-tracer"));

  auto sessions = issuer_actor.registry().entries();
  Bytes alice_session;
  for (const auto& [id, entry] : sessions) {
    if (entry.label == "alice") alice_session = id;
  }
  auto traced = parties::run_trace_credential(tribunal, *node_svc.conn,
                                              g.decode(alice_session));
  out << "credential trace of alice's session confirmed at height "
      << traced.receipt.height << " (depth " << traced.receipt.depth
      << ", meter " << traced.meter_delta << ")\n";
  out << "traced tag matches alice's credential: "
      << (fbs::match_sig(g, ipub, creds.at("alice"), traced.zeta1) ? "yes"
                                                                   : "no")
      << "\n";

  auto identified = parties::run_trace_identity(
      tribunal, *node_svc.conn, traced.zeta1, issuer_actor.registry());
  out << "identity trace resolved the tag back to \"" << identified.label
      << "\"\n";

  std::vector<GroupElement> all_sessions;
  for (const auto& [id, entry] : sessions) {
    all_sessions.push_back(g.decode(id));
  }
  auto batch = parties::run_batch_trace(
      tribunal, *node_svc.conn, contract::Op::kBatchCredential, all_sessions);
  out << "batch trace of " << batch.entries.size()
      << " sessions in one transaction (txid "
      << hex_encode(batch.receipt.txid).substr(0, 16) << "...)\n";

  parties::TracerActor outsider(g, setup.bundle,
                                platform.manufacturer_public(),
                                platform.service_public(),
                                to_bytes("mallory"), to_bytes("demo-mal"));
  auto rogue = parties::run_trace_credential(
      outsider, *node_svc.conn, g.decode(sessions.front().first));
  out << "unauthorized caller \"mallory\" traced too (height "
      << rogue.receipt.height << ")\n";

  auto report_text = parties::run_inspection_remote(
      *inspector_svc.conn, cid, 0, chain.tip_height());
  auto report = json::parse(report_text);
  out << "inspection: " << report["entries"].size()
      << " trace transactions on record, " << report["anomalies"].size()
      << " anomalies\n";
  for (const auto& anomaly : report["anomalies"]) {
    out << "  anomaly rule " << anomaly["rule"].get<std::string>()
        << ": " << anomaly["detail"].get<std::string>() << "\n";
  }

  auto check = chain.verify_chain();
  out << "chain verification: " << (check.ok ? "ok" : "broken") << " at "
      << chain.tip_height() + 1 << " blocks\n";

  issuer_svc.stop();
  verifier_svc.stop();
  node_svc.stop();
  inspector_svc.stop();
  std::filesystem::remove(chain_path);
  return out.str();
}

}  // namespace

ft_ctx* ft_ctx_new(const char* home_dir, const char* backend) {
  auto* ctx = new (std::nothrow) ft_ctx();
  if (!ctx) return nullptr;
  ctx->home = home_dir ? home_dir : ".";
  ctx->backend = backend ? backend : "";
  return ctx;
}

void ft_ctx_free(ft_ctx* ctx) { delete ctx; }

const char* ft_last_error(const ft_ctx* ctx) {
  return ctx ? ctx->last_error.c_str() : "null context";
}

int ft_setup(ft_ctx* ctx) {
  return wrap(ctx, [&] {
    store::Paths paths{ctx->home};
    if (store::file_exists(paths.config())) {
      fail("bad-argument", ctx->home + " is already set up");
    }
    store::ensure_home(paths);
    store::HomeConfig cfg;
    cfg.backend = resolve_backend_name(ctx, paths);
    store::write_text_file(paths.config(), store::config_to_json(cfg));

    enclave::Platform platform(backend_of(cfg.backend),
                               SystemRng::instance());
    contract::register_tracing_kind(platform);
    store::save_platform(paths.platform(), platform);

    ledger::Ledger chain(paths.chain(), platform.manufacturer_public(),
                         platform.service_public(), ledger_config(cfg));
    (void)chain.tip_height();
  });
}

int ft_keygen_issuer(ft_ctx* ctx, const char* out_path) {
  return wrap(ctx, [&] {
    auto home = load_home(ctx);
    auto key = fbs::issuer_keygen(home.g, SystemRng::instance());
    std::string path = out_path ? out_path : home.paths.issuer_key();
    store::write_text_file(path, store::issuer_key_to_json(home.g, key));
  });
}

int ft_keygen_user(ft_ctx* ctx, const char* label, const char* out_path) {
  return wrap(ctx, [&] {
    if (!label || !*label) fail("bad-argument", "user label is required");
    auto home = load_home(ctx);
    auto user = fbs::user_keygen(home.g, label, SystemRng::instance());
    std::string path = out_path ? out_path : home.paths.user_key(label);
    store::write_text_file(path,
                           store::user_identity_to_json(home.g, user));
  });
}

int ft_deploy(ft_ctx* ctx, char** contract_id_out) {
  return wrap(ctx, [&] {
    auto home = load_home(ctx);
    if (store::file_exists(home.paths.contract())) {
      fail("bad-argument", "contract already deployed in " + ctx->home);
    }
    auto ik = require_issuer_key(home.g, home.paths);
    PlatformHandle ph(backend_of(home.cfg.backend), home.paths.platform());
    ledger::Ledger chain(home.paths.chain(),
                         ph.platform.manufacturer_public(),
                         ph.platform.service_public(),
                         ledger_config(home.cfg));

    auto setup = parties::setup_tracing_contract(
        ph.platform, chain, fbs::issuer_public(ik), to_bytes("issuer"),
        SystemRng::instance());

    store::ContractInfo info{setup.bundle, setup.y_t};
    store::write_text_file(home.paths.contract(),
                           store::contract_info_to_json(home.g, info));
    store::save_platform(home.paths.platform(), ph.platform);
    if (contract_id_out) {
      *contract_id_out = dup_string(setup.bundle.contract_id);
    }
  });
}

int ft_issue(ft_ctx* ctx, const char* user_key_path, const char* message,
             const char* credential_out_path) {
  return wrap(ctx, [&] {
    if (!user_key_path) fail("bad-argument", "user key path is required");
    if (!credential_out_path) {
      fail("bad-argument", "credential output path is required");
    }
    auto home = load_home(ctx);
    auto info = require_contract(home.g, home.paths);
    auto ik = require_issuer_key(home.g, home.paths);
    auto user = store::user_identity_from_json(
        home.g, store::read_text_file(user_key_path));

    parties::IssuerActor actor(home.g, ik, info.y_t,
                               SystemRng::instance().bytes(32));
    load_registry(home.g, home.paths, actor.registry());

    auto pair = transport::make_bus_pair();
    std::thread server([&] { actor.serve(*pair.second); });
    fbs::Credential cred;
    try {
      cred = parties::run_issuance(*pair.first, home.g, actor.issuer(),
                                   info.y_t, user,
                                   to_bytes(message ? message : ""),
                                   SystemRng::instance());
    } catch (...) {
      pair.first->close();
      server.join();
      throw;
    }
    pair.first->close();
    server.join();

    store::write_text_file(home.paths.registry(),
                           store::registry_to_json(home.g,
                                                   actor.registry()));
    store::write_text_file(credential_out_path,
                           fbs::credential_to_json(home.g, cred));
  });
}

int ft_verify(ft_ctx* ctx, const char* credential_path, int* ok_out) {
  return wrap(ctx, [&] {
    if (!credential_path) fail("bad-argument", "credential path is required");
    if (!ok_out) fail("bad-argument", "ok output is required");
    auto home = load_home(ctx);
    auto ik = require_issuer_key(home.g, home.paths);
    auto cred = fbs::credential_from_json(
        home.g, store::read_text_file(credential_path));

    parties::VerifierActor actor(home.g, fbs::issuer_public(ik));
    auto pair = transport::make_bus_pair();
    std::thread server([&] { actor.serve(*pair.second); });
    bool ok = false;
    try {
      ok = parties::run_verification(*pair.first, home.g, cred);
    } catch (...) {
      pair.first->close();
      server.join();
      throw;
    }
    pair.first->close();
    server.join();
    *ok_out = ok ? 1 : 0;
  });
}

int ft_trace_credential(ft_ctx* ctx, const char* caller,
                        const char* session_id_hex, char** json_out) {
  return wrap(ctx, [&] {
    TraceRig rig(ctx);
    auto operand =
        decode_element_arg(rig.home.g, session_id_hex, "session id");
    auto tracer = rig.tracer(caller);
    auto result =
        parties::run_trace_credential(tracer, *rig.client, operand);

    json doc;
    doc["zeta1"] = hex_encode(rig.home.g.encode(result.zeta1));
    doc["meter_delta"] = result.meter_delta;
    put_receipt(doc, result.receipt);
    if (json_out) *json_out = dup_string(doc.dump(2) + "\n");
  });
}

int ft_trace_identity(ft_ctx* ctx, const char* caller, const char* zeta1_hex,
                      char** json_out) {
  return wrap(ctx, [&] {
    TraceRig rig(ctx);
    auto operand = decode_element_arg(rig.home.g, zeta1_hex, "zeta1");
    fbs::SessionRegistry registry;
    load_registry(rig.home.g, rig.home.paths, registry);
    auto tracer = rig.tracer(caller);
    auto result = parties::run_trace_identity(tracer, *rig.client, operand,
                                              registry);

    json doc;
    doc["session_id"] =
        hex_encode(rig.home.g.encode(result.session_element));
    doc["label"] = result.label;
    put_receipt(doc, result.receipt);
    if (json_out) *json_out = dup_string(doc.dump(2) + "\n");
  });
}

int ft_trace_batch(ft_ctx* ctx, const char* caller, const char* op,
                   const char* const* operands_hex, size_t count,
                   char** json_out) {
  return wrap(ctx, [&] {
    if (!op) fail("bad-argument", "batch op is required");
    std::string op_name = op;
    contract::Op batch_op;
    if (op_name == "cred") {
      batch_op = contract::Op::kBatchCredential;
    } else if (op_name == "id") {
      batch_op = contract::Op::kBatchIdentity;
    } else {
      fail("bad-argument", "batch op must be \"cred\" or \"id\"");
    }
    if (!operands_hex || count == 0) {
      fail("bad-argument", "batch needs at least one operand");
    }

    TraceRig rig(ctx);
    std::vector<GroupElement> operands;
    operands.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      operands.push_back(
          decode_element_arg(rig.home.g, operands_hex[i], "operand"));
    }

    fbs::SessionRegistry registry;
    if (batch_op == contract::Op::kBatchIdentity) {
      load_registry(rig.home.g, rig.home.paths, registry);
    }

    auto tracer = rig.tracer(caller);
    auto result =
        parties::run_batch_trace(tracer, *rig.client, batch_op, operands);

    json rows = json::array();
    for (const auto& [operand, traced] : result.entries) {
      json row;
      row["operand"] = hex_encode(rig.home.g.encode(operand));
      row["result"] = hex_encode(rig.home.g.encode(traced));
      if (batch_op == contract::Op::kBatchIdentity) {
        auto entry = registry.lookup(rig.home.g, traced);
        if (entry) row["label"] = entry->label;
      }
      rows.push_back(std::move(row));
    }
    json doc;
    doc["op"] = op_name;
    doc["entries"] = std::move(rows);
    put_receipt(doc, result.receipt);
    if (json_out) *json_out = dup_string(doc.dump(2) + "\n");
  });
}

int ft_inspect(ft_ctx* ctx, const char* contract_id, uint64_t from_height,
               uint64_t to_height, char** report_json_out) {
  return wrap(ctx, [&] {
    auto home = load_home(ctx);
    PlatformHandle ph(backend_of(home.cfg.backend), home.paths.platform());
    ledger::Ledger chain(home.paths.chain(),
                         ph.platform.manufacturer_public(),
                         ph.platform.service_public(),
                         ledger_config(home.cfg));

    std::string cid;
    if (contract_id && *contract_id) {
      cid = contract_id;
    } else {
      cid = require_contract(home.g, home.paths).bundle.contract_id;
    }
    if (to_height > chain.tip_height()) to_height = chain.tip_height();

    auto report = parties::run_inspection(chain, cid, from_height, to_height,
                                          policy_from(home.cfg));
    if (report_json_out) {
      *report_json_out = dup_string(parties::report_to_json(report) + "\n");
    }
  });
}

int ft_ledger_verify(ft_ctx* ctx, char** json_out) {
  return wrap(ctx, [&] {
    store::Paths paths{ctx->home};
    if (!store::file_exists(paths.chain())) {
      fail("not-setup", "no chain file at " + paths.chain());
    }
    auto check = ledger::Ledger::verify_chain_file(paths.chain());
    json doc;
    doc["path"] = paths.chain();
    doc["ok"] = check.ok;
    if (!check.ok) doc["first_bad_height"] = check.first_bad_height;
    if (json_out) *json_out = dup_string(doc.dump(2) + "\n");
  });
}

int ft_bench(ft_ctx* ctx, size_t runs, int as_json, char** out) {
  return wrap(ctx, [&] {
    store::Paths paths{ctx->home};
    std::string backend_name = resolve_backend_name(ctx, paths);
    if (runs == 0) runs = 300;
    auto chain_path = std::filesystem::temp_directory_path() /
                      ("fairtrace-bench-" + std::to_string(::getpid()) +
                       ".bin");

    auto rows = bench::run_bench(backend_of(backend_name), runs,
                                 chain_path.string(),
                                 SystemRng::instance());
    std::filesystem::remove(chain_path);
    std::string text =
        as_json ? bench::bench_to_json(backend_of(backend_name), runs, rows)
                : bench::bench_to_text(rows);
    if (out) *out = dup_string(text);
  });
}

int ft_demo(ft_ctx* ctx, char** transcript_out) {
  return wrap(ctx, [&] {
    store::Paths paths{ctx->home};
    std::string backend_name = resolve_backend_name(ctx, paths);
    auto transcript = run_demo(backend_name);
    if (transcript_out) *transcript_out = dup_string(transcript);
  });
}

void ft_string_free(char* s) { std::free(s); }
