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

#ifndef FAIRTRACE_LEDGER_HPP_
#define FAIRTRACE_LEDGER_HPP_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fairtrace/bytes.hpp"
#include "fairtrace/enclave.hpp"

// Append-only hash-chained ledger with a deterministic validator quorum.
// Validators re-verify enclave proofs and deployment attestations before a
// transaction enters the mempool; blocks persist to a file of
// length-prefixed frames that can be re-verified with no other state.

namespace fairtrace::ledger {

enum class TxKind : std::uint8_t {
  kDeploy = 1,
  kRegister = 2,
  kTraceCredential = 3,
  kTraceIdentity = 4,
  kBatch = 5,
};

const char* tx_kind_name(TxKind kind);

struct Transaction {
  std::string contract_id;
  Bytes caller;  // requester public key; session tau for tracers
  TxKind kind = TxKind::kDeploy;
  Bytes input_ct;
  Bytes output_ct;
  Bytes state_blob;  // sealed new state; for deploys the full bundle
  Bytes proof;       // enclave execution proof; empty for deploys
  std::uint64_t submitted_at = 0;
};

struct Block {
  std::uint64_t height = 0;
  Bytes prev_hash;
  std::uint64_t block_time = 0;
  std::vector<Transaction> txs;
  Bytes merkle_root;
  Bytes block_hash;
};

using Receipt = enclave::ConfirmationReceipt;

struct TxRecord {
  Transaction tx;
  Bytes txid;
  std::uint64_t height = 0;
  std::uint64_t block_time = 0;
};

struct ChainCheck {
  bool ok = false;
  std::uint64_t first_bad_height = 0;  // meaningful when !ok
};

Bytes tx_body_frame(const Transaction& tx);
Bytes tx_id(const Transaction& tx);
Bytes merkle_root(const std::vector<Bytes>& txids);
Bytes block_hash_of(std::uint64_t height, BytesView prev_hash,
                    BytesView merkle, std::uint64_t block_time);
Bytes encode_block(const Block& b);
Block decode_block(BytesView frame);

class Ledger {
 public:
  struct Config {
    std::uint64_t confirmation_depth = 2;
    std::uint32_t validator_count = 4;
    bool timed = false;
    std::uint64_t block_interval_ms = 6000;
  };

  // Opens or creates the chain file. An existing file is replayed through
  // the validators; corruption raises corrupt-ledger.
  Ledger(std::string file_path, Bytes manufacturer_public,
         Bytes service_public, Config config);

  const Config& config() const { return config_; }
  const std::string& file_path() const { return file_path_; }
  std::uint64_t tip_height() const;
  std::uint64_t now_ms() const;

  Bytes submit(const Transaction& tx);
  Block advance_block();
  // Runs advance_block until the receipt reaches the confirmation depth.
  Receipt confirm(BytesView txid);

  std::optional<Receipt> receipt(BytesView txid) const;
  std::vector<TxRecord> query_by_contract(
      const std::string& contract_id,
      std::optional<TxKind> kind = std::nullopt,
      std::optional<Bytes> caller = std::nullopt) const;
  std::vector<Block> blocks() const;

  ChainCheck verify_chain() const;
  static ChainCheck verify_chain_file(const std::string& path);

 private:
  struct ContractView {
    Bytes enclave_public;
    Bytes last_state_hash;
  };

  // One simulated consensus validator; all state is derived from accepted
  // transactions, so honest validators agree byte-for-byte.
  struct Validator {
    std::map<std::string, ContractView> views;
    // Empty result means accept; otherwise the rejection code.
    std::string check(const Ledger& l, const Transaction& tx) const;
    void apply(const Transaction& tx);
  };

  void append_to_file(const Block& b);
  void replay_file();

  std::string file_path_;
  Bytes manufacturer_public_;
  Bytes service_public_;
  Config config_;
  std::vector<Block> chain_;
  std::vector<Transaction> mempool_;
  std::map<Bytes, std::uint64_t> tx_index_;  // txid -> inclusion height
  std::vector<Validator> validators_;
  std::uint64_t clock_ms_ = 0;
  mutable std::mutex mu_;
};

}  // namespace fairtrace::ledger

#endif  // FAIRTRACE_LEDGER_HPP_
