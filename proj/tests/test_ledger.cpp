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
#include <optional>
#include <string>
#include <vector>

#include "fairtrace/bytes.hpp"
#include "fairtrace/contract.hpp"
#include "fairtrace/crypto.hpp"
#include "fairtrace/enclave.hpp"
#include "fairtrace/errors.hpp"
#include "fairtrace/fbs.hpp"
#include "fairtrace/ledger.hpp"
#include "fairtrace/rng.hpp"

namespace {

using namespace fairtrace;
using contract::Op;
using enclave::Platform;
using group::Backend;
using ledger::Block;
using ledger::Ledger;
using ledger::Transaction;
using ledger::TxKind;

std::string temp_chain_path(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / "fairtrace-ledger-tests";
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

// A platform wired to a ledger, driving the tracing contract through real
// submitted transactions.
struct Net {
  DrbgRng rng;
  Platform platform;
  Ledger chain;
  fbs::IssuerKey ik;
  fbs::IssuerPublic issuer;
  enclave::DeployBundle bundle;
  enclave::SealedState state;

  Net(const std::string& tag, Ledger::Config config = Ledger::Config())
      : rng(to_bytes(tag)), platform(Backend::Ec128, rng),
        chain(temp_chain_path(tag), platform.manufacturer_public(),
              platform.service_public(), config) {
    contract::register_tracing_kind(platform);
    ik = fbs::issuer_keygen(platform.group(), rng);
    issuer = fbs::issuer_public(ik);
    bundle = platform.deploy_contract(
        contract::kTracingKind,
        contract::make_init_params(platform.group(), issuer));
    state = bundle.state_init;
  }

  Transaction deploy_tx() {
    Transaction tx;
    tx.contract_id = bundle.contract_id;
    tx.caller = to_bytes("issuer");
    tx.kind = TxKind::kDeploy;
    tx.state_blob = enclave::encode_deploy_bundle(bundle);
    tx.submitted_at = chain.now_ms();
    return tx;
  }

  // Executes a request and shapes the result as a transaction; does not
  // submit it.
  Transaction exec_tx(const Bytes& request, TxKind kind, const Bytes& caller) {
    const std::string& cid = bundle.contract_id;
    Bytes input_ct = enclave::seal_contract_input(platform.input_public(cid),
                                                  cid, request, rng);
    auto out = platform.execute(cid, input_ct, state);
    state = out.new_state;
    Transaction tx;
    tx.contract_id = cid;
    tx.caller = caller;
    tx.kind = kind;
    tx.input_ct = input_ct;
    tx.output_ct = out.output_ct;
    tx.state_blob = enclave::encode_sealed_state(out.new_state);
    tx.proof = out.proof;
    tx.submitted_at = chain.now_ms();
    return tx;
  }

  void settle(const Transaction& tx) {
    Bytes id = chain.submit(tx);
    (void)chain.confirm(id);
  }

  Bytes register_and_settle() {
    settle(deploy_tx());
    auto tx = exec_tx(contract::make_register_request(), TxKind::kRegister,
                      to_bytes("issuer"));
    settle(tx);
    return ledger::tx_id(tx);
  }

  Bytes random_operand() {
    return platform.group().encode(platform.group().random_element(rng));
  }
};

}  // namespace

TEST_CASE("honest transactions flow through quorum to inclusion") {
  Net net("flow");
  Transaction d = net.deploy_tx();
  Bytes did = net.chain.submit(d);
  Block b1 = net.chain.advance_block();
  REQUIRE(b1.txs.size() == 1);
  CHECK(b1.height == 1);
  CHECK(ledger::tx_id(b1.txs[0]) == did);

  auto rcpt = net.chain.receipt(did);
  REQUIRE(rcpt.has_value());
  CHECK(rcpt->height == 1);
  CHECK(rcpt->depth == 1);

  auto reg = net.exec_tx(contract::make_register_request(), TxKind::kRegister,
                         to_bytes("issuer"));
  Bytes rid = net.chain.submit(reg);
  net.chain.advance_block();
  CHECK(net.chain.receipt(rid)->depth == 1);
  CHECK(net.chain.receipt(did)->depth == 2);

  auto tr = net.exec_tx(contract::make_trace_request(Op::kTraceCredential,
                                                     net.random_operand()),
                        TxKind::kTraceCredential, to_bytes("tracer-1"));
  Bytes tid = net.chain.submit(tr);
  auto receipt = net.chain.confirm(tid);
  CHECK(receipt.depth >= net.chain.config().confirmation_depth);
  CHECK(net.chain.verify_chain().ok);
}

TEST_CASE("quorum rejections carry the validator reason") {
  Net net("reject");

  SUBCASE("deploy without the service proof") {
    auto bad = net.bundle;
    bad.service_proof.clear();
    Transaction tx = net.deploy_tx();
    tx.state_blob = enclave::encode_deploy_bundle(bad);
    CHECK(error_code([&] { (void)net.chain.submit(tx); }) ==
          "invalid-attestation");
  }

  SUBCASE("proof over the wrong state hash") {
    net.settle(net.deploy_tx());
    auto old_state = net.state;
    Transaction tx = net.exec_tx(contract::make_register_request(),
                                 TxKind::kRegister, to_bytes("issuer"));
    tx.state_blob = enclave::encode_sealed_state(old_state);
    CHECK(error_code([&] { (void)net.chain.submit(tx); }) == "invalid-proof");
  }

  SUBCASE("execution against an unknown contract") {
    auto tx = net.exec_tx(contract::make_register_request(), TxKind::kRegister,
                          to_bytes("issuer"));
    CHECK(error_code([&] { (void)net.chain.submit(tx); }) == "invalid-proof");
  }

  SUBCASE("malformed shapes") {
    Transaction empty;
    CHECK(error_code([&] { (void)net.chain.submit(empty); }) ==
          "malformed-tx");

    Transaction d = net.deploy_tx();
    d.proof = to_bytes("spurious");
    CHECK(error_code([&] { (void)net.chain.submit(d); }) == "malformed-tx");

    Transaction garbage = net.deploy_tx();
    garbage.state_blob = to_bytes("not a bundle");
    CHECK(error_code([&] { (void)net.chain.submit(garbage); }) ==
          "malformed-tx");

    net.settle(net.deploy_tx());
    CHECK(error_code([&] { (void)net.chain.submit(net.deploy_tx()); }) ==
          "malformed-tx");

    Transaction hollow = net.exec_tx(contract::make_register_request(),
                                     TxKind::kRegister, to_bytes("issuer"));
    hollow.output_ct.clear();
    CHECK(error_code([&] { (void)net.chain.submit(hollow); }) ==
          "malformed-tx");
  }

  SUBCASE("duplicate submission") {
    Transaction d = net.deploy_tx();
    (void)net.chain.submit(d);
    CHECK(error_code([&] { (void)net.chain.submit(d); }) == "malformed-tx");
  }

  SUBCASE("rejected transactions never reach a block") {
    Transaction d = net.deploy_tx();
    d.proof = to_bytes("x");
    (void)error_code([&] { (void)net.chain.submit(d); });
    auto b = net.chain.advance_block();
    CHECK(b.txs.empty());
    CHECK_FALSE(net.chain.receipt(ledger::tx_id(d)).has_value());
  }
}

TEST_CASE("empty blocks extend the chain and deepen confirmations") {
  Net net("empty");
  for (int i = 0; i < 5; ++i) {
    Block b = net.chain.advance_block();
    CHECK(b.txs.empty());
    CHECK(b.height == static_cast<std::uint64_t>(i + 1));
  }
  CHECK(net.chain.tip_height() == 5);

  Bytes did = net.chain.submit(net.deploy_tx());
  net.chain.advance_block();
  CHECK(net.chain.receipt(did)->depth == 1);
  net.chain.advance_block();
  CHECK(net.chain.receipt(did)->depth == 2);
  CHECK(net.chain.verify_chain().ok);
}

TEST_CASE("long chains verify clean") {
  Net net("long");
  for (int i = 0; i < 1000; ++i) (void)net.chain.advance_block();
  auto check = net.chain.verify_chain();
  CHECK(check.ok);
  CHECK(net.chain.tip_height() == 1000);
}

TEST_CASE("queries return confirmed transactions under filters") {
  Net net("query");
  net.register_and_settle();

  Bytes tracer_a = to_bytes("tracer-a");
  Bytes tracer_b = to_bytes("tracer-b");
  for (int i = 0; i < 3; ++i) {
    auto tx = net.exec_tx(contract::make_trace_request(Op::kTraceCredential,
                                                       net.random_operand()),
                          TxKind::kTraceCredential,
                          i == 0 ? tracer_b : tracer_a);
    net.settle(tx);
  }
  for (int i = 0; i < 2; ++i) {
    auto tx = net.exec_tx(contract::make_trace_request(Op::kTraceIdentity,
                                                       net.random_operand()),
                          TxKind::kTraceIdentity, tracer_a);
    net.settle(tx);
  }

  const std::string& cid = net.bundle.contract_id;
  auto creds = net.chain.query_by_contract(cid, TxKind::kTraceCredential);
  CHECK(creds.size() == 3);
  auto ids = net.chain.query_by_contract(cid, TxKind::kTraceIdentity);
  CHECK(ids.size() == 2);

  auto by_a = net.chain.query_by_contract(cid, std::nullopt, tracer_a);
  CHECK(by_a.size() == 4);
  auto by_b = net.chain.query_by_contract(cid, std::nullopt, tracer_b);
  CHECK(by_b.size() == 1);

  auto all = net.chain.query_by_contract(cid);
  CHECK(all.size() == 7);
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i - 1].height <= all[i].height);
  }

  CHECK(net.chain.query_by_contract("feedfacefeedfacefeedfacefeedface")
            .empty());

  // Unconfirmed work stays out of query results.
  auto pending = net.exec_tx(contract::make_trace_request(
                                 Op::kTraceCredential, net.random_operand()),
                             TxKind::kTraceCredential, tracer_a);
  (void)net.chain.submit(pending);
  net.chain.advance_block();
  CHECK(net.chain.query_by_contract(cid, TxKind::kTraceCredential).size() ==
        3);
  (void)net.chain.advance_block();
  CHECK(net.chain.query_by_contract(cid, TxKind::kTraceCredential).size() ==
        4);
}

TEST_CASE("stored-byte mutations are located by height") {
  Net net("tamper");
  net.register_and_settle();
  for (int i = 0; i < 4; ++i) {
    net.settle(net.exec_tx(contract::make_trace_request(Op::kTraceCredential,
                                                        net.random_operand()),
                           TxKind::kTraceCredential, to_bytes("t")));
  }
  REQUIRE(net.chain.verify_chain().ok);
  std::string path = temp_chain_path("tamper-copy");

  // Re-frame the chain file with a single mutation.
  auto rewrite = [&](std::uint64_t target_height,
                     const std::function<void(Bytes&)>& mutate) {
    auto blocks = net.chain.blocks();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (const auto& b : blocks) {
      Bytes frame = ledger::encode_block(b);
      if (b.height == target_height) mutate(frame);
      Bytes len;
      put_u32_be(len, static_cast<std::uint32_t>(frame.size()));
      out.write(reinterpret_cast<const char*>(len.data()), 4);
      out.write(reinterpret_cast<const char*>(frame.data()),
                static_cast<std::streamsize>(frame.size()));
    }
    out.close();
    return Ledger::verify_chain_file(path);
  };

  SUBCASE("payload byte flip in block 5") {
    auto check = rewrite(5, [](Bytes& f) { f[f.size() / 2] ^= 0x01; });
    CHECK_FALSE(check.ok);
    CHECK(check.first_bad_height == 5);
  }

  SUBCASE("flip in an early block") {
    auto check = rewrite(2, [](Bytes& f) { f[f.size() - 10] ^= 0x40; });
    CHECK_FALSE(check.ok);
    CHECK(check.first_bad_height == 2);
  }

  SUBCASE("untampered copy verifies") {
    auto check = rewrite(9999, [](Bytes&) {});
    CHECK(check.ok);
  }
}

TEST_CASE("only one execution per contract may be in flight") {
  Net net("inflight");
  net.register_and_settle();
  auto t1 = net.exec_tx(contract::make_trace_request(Op::kTraceCredential,
                                                     net.random_operand()),
                        TxKind::kTraceCredential, to_bytes("t"));
  auto t2 = net.exec_tx(contract::make_trace_request(Op::kTraceCredential,
                                                     net.random_operand()),
                        TxKind::kTraceCredential, to_bytes("t"));
  (void)net.chain.submit(t1);
  // t2's proof binds the state after t1, which no validator has applied yet.
  CHECK(error_code([&] { (void)net.chain.submit(t2); }) == "invalid-proof");
  net.chain.advance_block();
  Bytes id2 = net.chain.submit(t2);
  (void)net.chain.confirm(id2);
  CHECK(net.chain.verify_chain().ok);
}

TEST_CASE("reordered transactions break the merkle root") {
  Net net("reorder");
  // Two deploys of independent contracts land in the same block.
  auto second = net.platform.deploy_contract(
      contract::kTracingKind,
      contract::make_init_params(net.platform.group(), net.issuer));
  Transaction d1 = net.deploy_tx();
  Transaction d2;
  d2.contract_id = second.contract_id;
  d2.caller = to_bytes("issuer");
  d2.kind = TxKind::kDeploy;
  d2.state_blob = enclave::encode_deploy_bundle(second);
  d2.submitted_at = net.chain.now_ms();
  (void)net.chain.submit(d1);
  (void)net.chain.submit(d2);
  Block b = net.chain.advance_block();
  REQUIRE(b.txs.size() == 2);
  std::uint64_t target = b.height;

  std::string path = temp_chain_path("reorder-copy");
  auto blocks = net.chain.blocks();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (auto& blk : blocks) {
    if (blk.height == target) std::swap(blk.txs[0], blk.txs[1]);
    Bytes frame = ledger::encode_block(blk);
    Bytes len;
    put_u32_be(len, static_cast<std::uint32_t>(frame.size()));
    out.write(reinterpret_cast<const char*>(len.data()), 4);
    out.write(reinterpret_cast<const char*>(frame.data()),
              static_cast<std::streamsize>(frame.size()));
  }
  out.close();
  auto check = Ledger::verify_chain_file(path);
  CHECK_FALSE(check.ok);
  CHECK(check.first_bad_height == target);
}

TEST_CASE("chain survives process restart through the file") {
  std::string tag = "restart";
  Bytes mfr;
  Bytes svc;
  std::string cid;
  std::string path;
  {
    Net net(tag);
    path = net.chain.file_path();
    net.register_and_settle();
    net.settle(net.exec_tx(contract::make_trace_request(Op::kTraceCredential,
                                                        net.random_operand()),
                           TxKind::kTraceCredential, to_bytes("t")));
    mfr = net.platform.manufacturer_public();
    svc = net.platform.service_public();
    cid = net.bundle.contract_id;
  }

  Ledger reopened(path, mfr, svc, Ledger::Config());
  CHECK(reopened.verify_chain().ok);
  CHECK(reopened.query_by_contract(cid, TxKind::kTraceCredential).size() ==
        1);
  CHECK(reopened.query_by_contract(cid, TxKind::kRegister).size() == 1);

  SUBCASE("corrupted file refuses to open") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(200);
    f.put('\x7f');
    f.close();
    CHECK(error_code([&] {
            Ledger broken(path, mfr, svc, Ledger::Config());
          }) == "corrupt-ledger");
  }
}

TEST_CASE("timed mode stamps the virtual clock") {
  Ledger::Config cfg;
  cfg.timed = true;
  cfg.confirmation_depth = 3;
  Net net("timed", cfg);
  CHECK(net.chain.now_ms() == 0);

  Transaction d = net.deploy_tx();
  CHECK(d.submitted_at == 0);
  Bytes did = net.chain.submit(d);
  auto receipt = net.chain.confirm(did);
  CHECK(receipt.depth == 3);
  // Three 6 s blocks: inclusion plus two more confirmations.
  CHECK(net.chain.now_ms() == 18000);

  auto records = net.chain.query_by_contract(net.bundle.contract_id);
  REQUIRE(records.size() == 1);
  CHECK(records[0].block_time == 6000);
}

TEST_CASE("transaction and kind plumbing") {
  CHECK(std::string(ledger::tx_kind_name(TxKind::kDeploy)) == "deploy");
  CHECK(std::string(ledger::tx_kind_name(TxKind::kBatch)) == "batch");
  CHECK(std::string(ledger::tx_kind_name(TxKind::kTraceCredential)) ==
        "trace-credential");

  Transaction tx;
  tx.contract_id = "abc";
  tx.caller = to_bytes("c");
  tx.kind = TxKind::kBatch;
  tx.input_ct = to_bytes("i");
  tx.output_ct = to_bytes("o");
  tx.state_blob = to_bytes("s");
  tx.proof = to_bytes("p");
  tx.submitted_at = 42;
  Bytes id1 = ledger::tx_id(tx);
  tx.submitted_at = 43;
  CHECK(ledger::tx_id(tx) != id1);

  Bytes a = crypto::sha256(to_bytes("a"));
  Bytes b = crypto::sha256(to_bytes("b"));
  Bytes c = crypto::sha256(to_bytes("c"));
  CHECK(ledger::merkle_root({a}) == a);
  CHECK(ledger::merkle_root({a, b}) ==
        crypto::sha256(concat({a, b})));
  // Odd counts duplicate the trailing leaf.
  CHECK(ledger::merkle_root({a, b, c}) ==
        crypto::sha256(concat({crypto::sha256(concat({a, b})),
                               crypto::sha256(concat({c, c}))})));
  CHECK(ledger::merkle_root({}) == Bytes(32, 0));
  CHECK(ledger::merkle_root({a, b}) != ledger::merkle_root({b, a}));
}

TEST_CASE("unknown txids cannot be confirmed") {
  Net net("unknown-confirm");
  Bytes bogus = crypto::sha256(to_bytes("nothing"));
  CHECK(error_code([&] { (void)net.chain.confirm(bogus); }) ==
        "malformed-tx");
}
