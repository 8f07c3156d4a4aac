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

#include "fairtrace/ledger.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <utility>

#include "fairtrace/crypto.hpp"
#include "fairtrace/errors.hpp"

namespace fairtrace::ledger {
namespace {

bool valid_kind(TxKind k) {
  switch (k) {
    case TxKind::kDeploy:
    case TxKind::kRegister:
    case TxKind::kTraceCredential:
    case TxKind::kTraceIdentity:
    case TxKind::kBatch:
      return true;
  }
  return false;
}

}  // namespace

const char* tx_kind_name(TxKind kind) {
  switch (kind) {
    case TxKind::kDeploy: return "deploy";
    case TxKind::kRegister: return "register";
    case TxKind::kTraceCredential: return "trace-credential";
    case TxKind::kTraceIdentity: return "trace-identity";
    case TxKind::kBatch: return "batch";
  }
  return "unknown";
}

Bytes tx_body_frame(const Transaction& tx) {
  FrameWriter w;
  w.str(tx.contract_id);
  w.bytes(tx.caller);
  w.u8(static_cast<std::uint8_t>(tx.kind));
  w.bytes(tx.input_ct);
  w.bytes(tx.output_ct);
  w.bytes(tx.state_blob);
  w.bytes(tx.proof);
  w.u64(tx.submitted_at);
  return w.take();
}

Bytes tx_id(const Transaction& tx) { return crypto::sha256(tx_body_frame(tx)); }

Bytes merkle_root(const std::vector<Bytes>& txids) {
  if (txids.empty()) return Bytes(crypto::kHashSize, 0);
  std::vector<Bytes> level = txids;
  while (level.size() > 1) {
    if (level.size() % 2 != 0) level.push_back(level.back());
    std::vector<Bytes> next;
    next.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      next.push_back(crypto::sha256(concat({level[i], level[i + 1]})));
    }
    level = std::move(next);
  }
  return level[0];
}

Bytes block_hash_of(std::uint64_t height, BytesView prev_hash,
                    BytesView merkle, std::uint64_t block_time) {
  FrameWriter w;
  w.u64(height);
  w.bytes(prev_hash);
  w.bytes(merkle);
  w.u64(block_time);
  return crypto::sha256(w.take());
}

Bytes encode_block(const Block& b) {
  FrameWriter w;
  w.u64(b.height);
  w.bytes(b.prev_hash);
  w.u64(b.block_time);
  w.u32(static_cast<std::uint32_t>(b.txs.size()));
  for (const auto& tx : b.txs) w.bytes(tx_body_frame(tx));
  w.bytes(b.merkle_root);
  w.bytes(b.block_hash);
  return w.take();
}

Block decode_block(BytesView frame) {
  FrameReader r(frame);
  Block b;
  b.height = r.u64();
  b.prev_hash = r.bytes();
  b.block_time = r.u64();
  std::uint32_t n = r.u32();
  b.txs.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Bytes body = r.bytes();
    FrameReader tr(body);
    Transaction tx;
    tx.contract_id = tr.str();
    tx.caller = tr.bytes();
    tx.kind = static_cast<TxKind>(tr.u8());
    tx.input_ct = tr.bytes();
    tx.output_ct = tr.bytes();
    tx.state_blob = tr.bytes();
    tx.proof = tr.bytes();
    tx.submitted_at = tr.u64();
    tr.expect_done();
    b.txs.push_back(std::move(tx));
  }
  b.merkle_root = r.bytes();
  b.block_hash = r.bytes();
  r.expect_done();
  return b;
}

std::string Ledger::Validator::check(const Ledger& l,
                                     const Transaction& tx) const {
  if (tx.contract_id.empty() || !valid_kind(tx.kind)) return "malformed-tx";

  if (tx.kind == TxKind::kDeploy) {
    if (!tx.proof.empty()) return "malformed-tx";
    if (views.count(tx.contract_id) != 0) return "malformed-tx";
    enclave::DeployBundle bundle;
    try {
      bundle = enclave::decode_deploy_bundle(tx.state_blob);
    } catch (const Error&) {
      return "malformed-tx";
    }
    if (bundle.contract_id != tx.contract_id) return "malformed-tx";
    if (!enclave::validate_deploy_bundle(bundle, l.manufacturer_public_,
                                         l.service_public_)) {
      return "invalid-attestation";
    }
    return "";
  }

  auto view = views.find(tx.contract_id);
  if (view == views.end()) return "invalid-proof";
  if (tx.input_ct.empty() || tx.output_ct.empty() || tx.state_blob.empty()) {
    return "malformed-tx";
  }
  Bytes frame = enclave::exec_proof_frame(
      tx.contract_id, crypto::sha256(tx.input_ct),
      crypto::sha256(tx.output_ct), view->second.last_state_hash,
      crypto::sha256(tx.state_blob));
  if (!crypto::verify_signature(view->second.enclave_public, frame,
                                tx.proof)) {
    return "invalid-proof";
  }
  return "";
}

void Ledger::Validator::apply(const Transaction& tx) {
  if (tx.kind == TxKind::kDeploy) {
    auto bundle = enclave::decode_deploy_bundle(tx.state_blob);
    ContractView view;
    view.enclave_public = bundle.attestation.enclave_public;
    view.last_state_hash =
        crypto::sha256(enclave::encode_sealed_state(bundle.state_init));
    views.emplace(tx.contract_id, std::move(view));
    return;
  }
  views.at(tx.contract_id).last_state_hash = crypto::sha256(tx.state_blob);
}

Ledger::Ledger(std::string file_path, Bytes manufacturer_public,
               Bytes service_public, Config config)
    : file_path_(std::move(file_path)),
      manufacturer_public_(std::move(manufacturer_public)),
      service_public_(std::move(service_public)), config_(config),
      validators_(config.validator_count) {
  if (config_.validator_count < 1) {
    fail("malformed-tx", "validator count must be positive");
  }
  if (std::filesystem::exists(file_path_) &&
      std::filesystem::file_size(file_path_) > 0) {
    replay_file();
    return;
  }
  Block genesis;
  genesis.height = 0;
  genesis.prev_hash = Bytes(crypto::kHashSize, 0);
  genesis.block_time = 0;
  genesis.merkle_root = merkle_root({});
  genesis.block_hash = block_hash_of(0, genesis.prev_hash,
                                     genesis.merkle_root, 0);
  append_to_file(genesis);
  chain_.push_back(std::move(genesis));
}

void Ledger::append_to_file(const Block& b) {
  std::ofstream out(file_path_, std::ios::binary | std::ios::app);
  if (!out) fail("corrupt-ledger", "cannot open chain file for append");
  Bytes frame = encode_block(b);
  Bytes len;
  put_u32_be(len, static_cast<std::uint32_t>(frame.size()));
  out.write(reinterpret_cast<const char*>(len.data()),
            static_cast<std::streamsize>(len.size()));
  out.write(reinterpret_cast<const char*>(frame.data()),
            static_cast<std::streamsize>(frame.size()));
  if (!out) fail("corrupt-ledger", "short write to chain file");
}

void Ledger::replay_file() {
  auto check = verify_chain_file(file_path_);
  if (!check.ok) {
    fail("corrupt-ledger",
         "chain file fails verification at height " +
             std::to_string(check.first_bad_height));
  }
  std::ifstream in(file_path_, std::ios::binary);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  BytesView view(reinterpret_cast<const std::uint8_t*>(raw.data()),
                 raw.size());
  std::size_t off = 0;
  while (off + 4 <= view.size()) {
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = len << 8 | view[off + i];
    Block b = decode_block(view.subspan(off + 4, len));
    off += 4 + len;
    for (std::size_t i = 0; i < b.txs.size(); ++i) {
      const auto& tx = b.txs[i];
      for (auto& v : validators_) {
        if (!v.check(*this, tx).empty()) {
          fail("corrupt-ledger",
               "replayed transaction rejected at height " +
                   std::to_string(b.height));
        }
        v.apply(tx);
      }
      tx_index_.emplace(tx_id(tx), b.height);
    }
    clock_ms_ = b.block_time;
    chain_.push_back(std::move(b));
  }
}

std::uint64_t Ledger::tip_height() const {
  std::lock_guard lk(mu_);
  return chain_.back().height;
}

std::uint64_t Ledger::now_ms() const {
  std::lock_guard lk(mu_);
  return clock_ms_;
}

Bytes Ledger::submit(const Transaction& tx) {
  std::lock_guard lk(mu_);
  Bytes id = tx_id(tx);
  if (tx_index_.count(id) != 0) fail("malformed-tx", "duplicate transaction");
  for (const auto& pending : mempool_) {
    if (tx_id(pending) == id) fail("malformed-tx", "duplicate transaction");
  }

  std::uint32_t votes = 0;
  std::string first_reason;
  for (const auto& v : validators_) {
    std::string reason = v.check(*this, tx);
    if (reason.empty()) {
      votes += 1;
    } else if (first_reason.empty()) {
      first_reason = reason;
    }
  }
  // Quorum: at least two thirds of the validators.
  if (votes * 3 < validators_.size() * 2) {
    fail(first_reason.empty() ? "invalid-proof" : first_reason,
         "validator quorum rejected the transaction");
  }
  mempool_.push_back(tx);
  return id;
}

Block Ledger::advance_block() {
  std::lock_guard lk(mu_);
  if (config_.timed) clock_ms_ += config_.block_interval_ms;

  Block b;
  b.height = chain_.back().height + 1;
  b.prev_hash = chain_.back().block_hash;
  b.block_time = clock_ms_;
  b.txs = std::move(mempool_);
  mempool_.clear();

  std::vector<Bytes> ids;
  ids.reserve(b.txs.size());
  for (const auto& tx : b.txs) {
    for (auto& v : validators_) v.apply(tx);
    ids.push_back(tx_id(tx));
  }
  b.merkle_root = merkle_root(ids);
  b.block_hash = block_hash_of(b.height, b.prev_hash, b.merkle_root,
                               b.block_time);
  for (const auto& id : ids) tx_index_.emplace(id, b.height);
  append_to_file(b);
  chain_.push_back(b);
  return b;
}

Receipt Ledger::confirm(BytesView txid) {
  Bytes id(txid.begin(), txid.end());
  {
    std::lock_guard lk(mu_);
    bool pending = false;
    for (const auto& tx : mempool_) {
      if (tx_id(tx) == id) pending = true;
    }
    if (!pending && tx_index_.count(id) == 0) {
      fail("malformed-tx", "transaction is neither pending nor included");
    }
  }
  for (;;) {
    {
      std::lock_guard lk(mu_);
      auto it = tx_index_.find(id);
      if (it != tx_index_.end()) {
        std::uint64_t depth = chain_.back().height - it->second + 1;
        if (depth >= config_.confirmation_depth) {
          return Receipt{id, it->second, depth};
        }
      }
    }
    (void)advance_block();
  }
}

std::optional<Receipt> Ledger::receipt(BytesView txid) const {
  std::lock_guard lk(mu_);
  auto it = tx_index_.find(Bytes(txid.begin(), txid.end()));
  if (it == tx_index_.end()) return std::nullopt;
  Receipt r;
  r.txid = it->first;
  r.height = it->second;
  r.depth = chain_.back().height - it->second + 1;
  return r;
}

std::vector<TxRecord> Ledger::query_by_contract(
    const std::string& contract_id, std::optional<TxKind> kind,
    std::optional<Bytes> caller) const {
  std::lock_guard lk(mu_);
  std::vector<TxRecord> out;
  std::uint64_t tip = chain_.back().height;
  for (const auto& b : chain_) {
    // Confirmed means the block has reached the configured depth.
    if (tip - b.height + 1 < config_.confirmation_depth) continue;
    for (const auto& tx : b.txs) {
      if (tx.contract_id != contract_id) continue;
      if (kind && tx.kind != *kind) continue;
      if (caller && tx.caller != *caller) continue;
      TxRecord rec;
      rec.tx = tx;
      rec.txid = tx_id(tx);
      rec.height = b.height;
      rec.block_time = b.block_time;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<Block> Ledger::blocks() const {
  std::lock_guard lk(mu_);
  return chain_;
}

ChainCheck Ledger::verify_chain() const {
  std::string path;
  {
    std::lock_guard lk(mu_);
    path = file_path_;
  }
  return verify_chain_file(path);
}

ChainCheck Ledger::verify_chain_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return ChainCheck{false, 0};
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  BytesView view(reinterpret_cast<const std::uint8_t*>(raw.data()),
                 raw.size());

  std::size_t off = 0;
  std::uint64_t expected_height = 0;
  Bytes prev_hash(crypto::kHashSize, 0);
  while (off < view.size()) {
    if (off + 4 > view.size()) return ChainCheck{false, expected_height};
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = len << 8 | view[off + i];
    if (off + 4 + len > view.size()) return ChainCheck{false, expected_height};

    Block b;
    try {
      b = decode_block(view.subspan(off + 4, len));
    } catch (const Error&) {
      return ChainCheck{false, expected_height};
    }
    off += 4 + len;

    if (b.height != expected_height) return ChainCheck{false, expected_height};
    if (b.prev_hash != prev_hash) return ChainCheck{false, b.height};
    std::vector<Bytes> ids;
    ids.reserve(b.txs.size());
    for (const auto& tx : b.txs) ids.push_back(tx_id(tx));
    if (merkle_root(ids) != b.merkle_root) return ChainCheck{false, b.height};
    if (block_hash_of(b.height, b.prev_hash, b.merkle_root, b.block_time) !=
        b.block_hash) {
      return ChainCheck{false, b.height};
    }
    prev_hash = b.block_hash;
    expected_height += 1;
  }
  if (expected_height == 0) return ChainCheck{false, 0};
  return ChainCheck{true, 0};
}

}  // namespace fairtrace::ledger
