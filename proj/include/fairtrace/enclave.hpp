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

#ifndef FAIRTRACE_ENCLAVE_HPP_
#define FAIRTRACE_ENCLAVE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>

#include "fairtrace/bytes.hpp"
#include "fairtrace/crypto.hpp"
#include "fairtrace/fbs.hpp"
#include "fairtrace/group.hpp"
#include "fairtrace/rng.hpp"

// Simulated trusted-execution platform. Each deployed contract gets its own
// enclave identity (fresh signing key endorsed by the platform's fixed
// manufacturer key), an input decryption key, and a sealing key. Contract
// state only ever leaves the enclave sealed; execution outputs leave
// encrypted under single-use keys that are released exclusively through an
// authenticated channel, and only once the carrying transaction is confirmed
// deep enough.

namespace fairtrace::enclave {

using group::Group;
using group::GroupElement;

// Authenticated encryption of serialized contract state. The version is a
// rollback counter: the enclave only ever executes on the exact version it
// produced last.
struct SealedState {
  std::string contract_id;
  std::uint64_t version = 0;
  Bytes blob;  // nonce || ciphertext || tag under key_state
};

struct Attestation {
  Bytes measurement;  // hash of deployed bytecode
  std::string contract_id;
  Bytes enclave_public;
  Bytes input_public;
  Bytes state_init_hash;
  Bytes enclave_sig;  // enclave key over the report frame
  Bytes endorsement;  // manufacturer key over (enclave_public, measurement)
};

struct DeployBundle {
  std::string kind;
  Bytes init_params;
  std::string contract_id;
  SealedState state_init;
  Attestation attestation;
  Bytes service_proof;  // attestation service countersignature
};

struct ExecOutput {
  Bytes output_ct;  // nonce || ciphertext || tag under a fresh one-shot key
  SealedState new_state;
  Bytes proof;  // enclave signature over the five bound hashes
};

// What a ledger reader hands back about an included transaction.
struct ConfirmationReceipt {
  Bytes txid;
  std::uint64_t height = 0;
  std::uint64_t depth = 0;
};

struct ChannelOffer {
  std::string contract_id;
  Bytes tau;            // requester session public key, group-encoded
  Bytes enclave_share;  // enclave ephemeral group element
  Bytes sig;            // enclave key over the offer frame
};

// One direction-tagged end of an established channel. Nonces encode the
// direction and a strictly in-order message counter.
class ChannelEnd {
 public:
  ChannelEnd(Bytes key, std::string context, std::uint8_t send_direction)
      : key_(std::move(key)), context_(std::move(context)),
        send_dir_(send_direction) {}

  Bytes seal(BytesView pt);
  std::optional<Bytes> open(BytesView frame);

 private:
  Bytes key_;
  std::string context_;
  std::uint8_t send_dir_;
  std::uint64_t send_ctr_ = 0;
  std::uint64_t recv_ctr_ = 0;
};

// Contract programs run in-process; bytecode is the canonical serialization
// of (kind, init params) and the measurement is its hash.
class ContractLogic {
 public:
  virtual ~ContractLogic() = default;
  virtual Bytes init(const Group& g, BytesView params, Rng& rng) = 0;
  // Returns (new state, output).
  virtual std::pair<Bytes, Bytes> step(const Group& g, BytesView state,
                                       BytesView input, Rng& rng) = 0;
};

using LogicFactory = std::function<std::unique_ptr<ContractLogic>()>;

class Platform {
 public:
  struct Config {
    std::uint64_t confirmation_depth = 2;
  };

  using Observer =
      std::function<void(std::string_view event, std::string_view detail)>;

  Platform(group::Backend backend, Rng& rng);
  Platform(group::Backend backend, Rng& rng, Config config);
  ~Platform();

  const Group& group() const { return group_; }
  const Config& config() const { return config_; }
  Bytes manufacturer_public() const;
  Bytes service_public() const;

  void register_kind(std::string kind, LogicFactory factory);

  DeployBundle deploy_contract(std::string_view kind, BytesView init_params);
  // Attestation service: returns the countersignature or throws
  // bad-attestation.
  Bytes verify_attestation(const Attestation& att) const;

  Bytes input_public(const std::string& contract_id) const;
  Bytes enclave_public(const std::string& contract_id) const;

  ExecOutput execute(const std::string& contract_id, BytesView input_ct,
                     const SealedState& current);

  ChannelOffer open_channel(const std::string& contract_id,
                            const GroupElement& tau);
  // Decrypts the output produced by execute and delivers it sealed to the
  // channel keyed by tau. Requires the carrying transaction confirmed at
  // config.confirmation_depth or deeper.
  Bytes release_output(const std::string& contract_id, const GroupElement& tau,
                       BytesView output_ct, const ConfirmationReceipt& receipt);

  void set_observer(Observer observer);

  // Snapshot of all platform secrets (the enclave's private disk): fixed
  // signing keys plus per-contract key material and rollback counters.
  // Pending output keys and channels are session-scoped and not included.
  Bytes export_state() const;
  // Restores a snapshot. Contract kinds must be registered first.
  void import_state(BytesView state);

 private:
  struct Instance;

  Instance& instance(const std::string& contract_id);
  const Instance& instance(const std::string& contract_id) const;
  void notify(std::string_view event, std::string_view detail);

  group::Backend backend_;
  const Group group_;
  Config config_;
  Rng& rng_;
  crypto::SigningKey manufacturer_;
  crypto::SigningKey service_;
  std::map<std::string, LogicFactory, std::less<>> kinds_;
  std::map<std::string, std::unique_ptr<Instance>> instances_;
  mutable std::shared_mutex instances_mu_;
  std::mutex rng_mu_;
  Observer observer_;
};

// Requester-side channel establishment from an enclave offer.
ChannelEnd accept_channel(const Group& g, const ChannelOffer& offer,
                          const fbs::TracerSessionKey& session,
                          BytesView enclave_public);

// Canonical frames.
Bytes encode_sealed_state(const SealedState& st);
SealedState decode_sealed_state(BytesView b);
Bytes encode_attestation(const Attestation& att);
Attestation decode_attestation(BytesView b);
Bytes encode_deploy_bundle(const DeployBundle& bundle);
DeployBundle decode_deploy_bundle(BytesView b);
Bytes encode_channel_offer(const ChannelOffer& offer);
ChannelOffer decode_channel_offer(BytesView b);

Bytes bytecode_frame(std::string_view kind, BytesView init_params);
Bytes attestation_report_frame(const Attestation& att);
Bytes endorsement_frame(BytesView enclave_public, BytesView measurement);
Bytes exec_proof_frame(std::string_view contract_id, BytesView input_ct_hash,
                       BytesView output_ct_hash, BytesView old_state_hash,
                       BytesView new_state_hash);
Bytes channel_offer_frame(std::string_view contract_id, BytesView tau,
                          BytesView enclave_share);

// Full attestation check as validators run it: signatures, endorsement,
// service proof, measurement against the bundle's bytecode, and contract id
// derivation.
bool validate_deploy_bundle(const DeployBundle& bundle,
                            BytesView manufacturer_public,
                            BytesView service_public);

// Encrypt a contract request for the enclave's input key.
Bytes seal_contract_input(BytesView input_public, std::string_view contract_id,
                          BytesView request, Rng& rng);

}  // namespace fairtrace::enclave

#endif  // FAIRTRACE_ENCLAVE_HPP_
