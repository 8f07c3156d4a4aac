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

#include "fairtrace/enclave.hpp"

#include <utility>

#include "fairtrace/errors.hpp"

namespace fairtrace::enclave {
namespace {

constexpr std::uint8_t kDirEnclave = 0x01;
constexpr std::uint8_t kDirRequester = 0x02;

Bytes sealed_aad(const std::string& contract_id, std::uint64_t version) {
  Bytes aad = to_bytes(contract_id);
  put_u64_be(aad, version);
  return aad;
}

Bytes aead_frame_seal(BytesView key, BytesView pt, BytesView aad, Rng& rng) {
  Bytes nonce = rng.bytes(crypto::kAeadNonceSize);
  Bytes out = nonce;
  append(out, crypto::aead_seal(key, nonce, aad, pt));
  return out;
}

std::optional<Bytes> aead_frame_open(BytesView key, BytesView frame,
                                     BytesView aad) {
  if (frame.size() < crypto::kAeadNonceSize + crypto::kAeadTagSize) {
    return std::nullopt;
  }
  auto nonce = frame.subspan(0, crypto::kAeadNonceSize);
  auto body = frame.subspan(crypto::kAeadNonceSize);
  return crypto::aead_open(key, nonce, aad, body);
}

Bytes channel_key(const Group& g, const std::string& contract_id,
                  const GroupElement& shared, BytesView tau_enc,
                  BytesView share_enc) {
  Bytes salt = concat({tau_enc, share_enc});
  return crypto::hkdf32(g.encode(shared), salt,
                        to_bytes("fairtrace-channel/" + contract_id));
}

std::string derive_contract_id(BytesView measurement, BytesView enclave_public,
                               BytesView input_public) {
  Bytes digest =
      crypto::sha256(concat({measurement, enclave_public, input_public}));
  digest.resize(16);
  return hex_encode(digest);
}

}  // namespace

struct Platform::Instance {
  std::string kind;
  std::unique_ptr<ContractLogic> logic;
  crypto::SigningKey enclave_key;
  crypto::BoxKey input_key;
  Bytes seal_key;
  std::uint64_t version = 0;
  // Single-use output keys, consumed on release.
  std::map<Bytes, Bytes> pending_outputs;
  std::map<Bytes, ChannelEnd> channels;
  std::mutex mu;

  Instance(crypto::SigningKey ek, crypto::BoxKey bk, Bytes sk)
      : enclave_key(std::move(ek)), input_key(std::move(bk)),
        seal_key(std::move(sk)) {}
};

Platform::~Platform() = default;

Platform::Platform(group::Backend backend, Rng& rng)
    : Platform(backend, rng, Config()) {}

Platform::Platform(group::Backend backend, Rng& rng, Config config)
    : backend_(backend), group_(Group::setup(128, backend)), config_(config),
      rng_(rng), manufacturer_(crypto::SigningKey::generate(rng)),
      service_(crypto::SigningKey::generate(rng)) {}

Bytes Platform::manufacturer_public() const {
  return manufacturer_.public_key();
}

Bytes Platform::service_public() const { return service_.public_key(); }

void Platform::register_kind(std::string kind, LogicFactory factory) {
  std::unique_lock lk(instances_mu_);
  if (!kinds_.emplace(std::move(kind), std::move(factory)).second) {
    fail("duplicate-kind", "contract kind already registered");
  }
}

void Platform::set_observer(Observer observer) {
  observer_ = std::move(observer);
}

void Platform::notify(std::string_view event, std::string_view detail) {
  if (observer_) observer_(event, detail);
}

Platform::Instance& Platform::instance(const std::string& contract_id) {
  std::shared_lock lk(instances_mu_);
  auto it = instances_.find(contract_id);
  if (it == instances_.end()) fail("unknown-contract", contract_id);
  return *it->second;
}

const Platform::Instance& Platform::instance(
    const std::string& contract_id) const {
  std::shared_lock lk(instances_mu_);
  auto it = instances_.find(contract_id);
  if (it == instances_.end()) fail("unknown-contract", contract_id);
  return *it->second;
}

Bytes Platform::input_public(const std::string& contract_id) const {
  return instance(contract_id).input_key.public_key();
}

Bytes Platform::enclave_public(const std::string& contract_id) const {
  return instance(contract_id).enclave_key.public_key();
}

DeployBundle Platform::deploy_contract(std::string_view kind,
                                       BytesView init_params) {
  LogicFactory factory;
  {
    std::shared_lock lk(instances_mu_);
    auto it = kinds_.find(kind);
    if (it == kinds_.end()) fail("unknown-kind", std::string(kind));
    factory = it->second;
  }

  Bytes bytecode = bytecode_frame(kind, init_params);
  Bytes measurement = crypto::sha256(bytecode);

  std::unique_lock rng_lk(rng_mu_);
  auto enclave_key = crypto::SigningKey::generate(rng_);
  auto input_key = crypto::BoxKey::generate(rng_);
  Bytes seal_key = rng_.bytes(crypto::kAeadKeySize);
  std::string contract_id = derive_contract_id(
      measurement, enclave_key.public_key(), input_key.public_key());

  auto logic = factory();
  Bytes state0 = logic->init(group_, init_params, rng_);

  SealedState sealed;
  sealed.contract_id = contract_id;
  sealed.version = 0;
  sealed.blob = aead_frame_seal(seal_key, state0,
                                sealed_aad(contract_id, 0), rng_);
  rng_lk.unlock();

  Attestation att;
  att.measurement = measurement;
  att.contract_id = contract_id;
  att.enclave_public = enclave_key.public_key();
  att.input_public = input_key.public_key();
  att.state_init_hash = crypto::sha256(encode_sealed_state(sealed));
  att.enclave_sig = enclave_key.sign(attestation_report_frame(att));
  att.endorsement =
      manufacturer_.sign(endorsement_frame(att.enclave_public, measurement));

  DeployBundle bundle;
  bundle.kind = std::string(kind);
  bundle.init_params = Bytes(init_params.begin(), init_params.end());
  bundle.contract_id = contract_id;
  bundle.state_init = sealed;
  bundle.attestation = att;
  bundle.service_proof = verify_attestation(att);

  auto inst = std::make_unique<Instance>(std::move(enclave_key),
                                         std::move(input_key),
                                         std::move(seal_key));
  inst->kind = std::string(kind);
  inst->logic = std::move(logic);
  {
    std::unique_lock lk(instances_mu_);
    instances_.emplace(contract_id, std::move(inst));
  }
  notify("deploy", contract_id);
  return bundle;
}

Bytes Platform::verify_attestation(const Attestation& att) const {
  if (!crypto::verify_signature(att.enclave_public,
                                attestation_report_frame(att),
                                att.enclave_sig)) {
    fail("bad-attestation", "report signature check failed");
  }
  if (!crypto::verify_signature(
          manufacturer_.public_key(),
          endorsement_frame(att.enclave_public, att.measurement),
          att.endorsement)) {
    fail("bad-attestation", "endorsement check failed");
  }
  if (att.contract_id != derive_contract_id(att.measurement,
                                            att.enclave_public,
                                            att.input_public)) {
    fail("bad-attestation", "contract id mismatch");
  }
  return service_.sign(encode_attestation(att));
}

ExecOutput Platform::execute(const std::string& contract_id,
                             BytesView input_ct, const SealedState& current) {
  Instance& inst = instance(contract_id);
  std::unique_lock lk(inst.mu);

  if (current.contract_id != contract_id || current.version != inst.version) {
    fail("stale-state", "sealed state is not the latest version");
  }
  auto state = aead_frame_open(inst.seal_key, current.blob,
                               sealed_aad(contract_id, current.version));
  if (!state) fail("stale-state", "sealed state fails authentication");

  auto request = inst.input_key.open(input_ct, to_bytes(contract_id));
  if (!request) fail("bad-input-ciphertext", contract_id);

  Bytes new_state;
  Bytes output;
  try {
    std::unique_lock rng_lk(rng_mu_);
    std::tie(new_state, output) = inst.logic->step(group_, *state, *request,
                                                   rng_);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail("contract-fault", e.what());
  }

  ExecOutput out;
  inst.version += 1;
  out.new_state.contract_id = contract_id;
  out.new_state.version = inst.version;

  std::unique_lock rng_lk(rng_mu_);
  out.new_state.blob = aead_frame_seal(inst.seal_key, new_state,
                                       sealed_aad(contract_id, inst.version),
                                       rng_);
  Bytes out_key = rng_.bytes(crypto::kAeadKeySize);
  out.output_ct = aead_frame_seal(out_key, output, to_bytes(contract_id),
                                  rng_);
  rng_lk.unlock();

  inst.pending_outputs[crypto::sha256(out.output_ct)] = out_key;
  out.proof = inst.enclave_key.sign(exec_proof_frame(
      contract_id, crypto::sha256(input_ct), crypto::sha256(out.output_ct),
      crypto::sha256(encode_sealed_state(current)),
      crypto::sha256(encode_sealed_state(out.new_state))));
  lk.unlock();
  notify("execute", contract_id);
  return out;
}

ChannelOffer Platform::open_channel(const std::string& contract_id,
                                    const GroupElement& tau) {
  Instance& inst = instance(contract_id);
  std::unique_lock rng_lk(rng_mu_);
  auto k_e = group_.random_scalar_nonzero(rng_);
  rng_lk.unlock();
  auto share = group_.exp(group_.generator(), k_e);
  auto shared = group_.exp(tau, k_e);

  ChannelOffer offer;
  offer.contract_id = contract_id;
  offer.tau = group_.encode(tau);
  offer.enclave_share = group_.encode(share);
  offer.sig = inst.enclave_key.sign(
      channel_offer_frame(contract_id, offer.tau, offer.enclave_share));

  Bytes key = channel_key(group_, contract_id, shared, offer.tau,
                          offer.enclave_share);
  std::unique_lock lk(inst.mu);
  inst.channels.insert_or_assign(
      offer.tau, ChannelEnd(std::move(key), contract_id, kDirEnclave));
  lk.unlock();
  notify("channel", contract_id);
  return offer;
}

Bytes Platform::release_output(const std::string& contract_id,
                               const GroupElement& tau, BytesView output_ct,
                               const ConfirmationReceipt& receipt) {
  Instance& inst = instance(contract_id);
  std::unique_lock lk(inst.mu);

  auto ch = inst.channels.find(group_.encode(tau));
  if (ch == inst.channels.end()) {
    fail("channel-closed", "no channel established for requester");
  }
  if (receipt.depth < config_.confirmation_depth) {
    fail("unconfirmed-transaction",
         "confirmation depth " + std::to_string(receipt.depth) + " below " +
             std::to_string(config_.confirmation_depth));
  }
  auto key = inst.pending_outputs.find(crypto::sha256(output_ct));
  if (key == inst.pending_outputs.end()) {
    fail("unknown-output", "no pending key for output ciphertext");
  }
  auto plain = aead_frame_open(key->second, output_ct, to_bytes(contract_id));
  if (!plain) fail("unknown-output", "output ciphertext fails authentication");
  inst.pending_outputs.erase(key);

  Bytes framed = ch->second.seal(*plain);
  lk.unlock();
  notify("release", contract_id);
  return framed;
}

Bytes ChannelEnd::seal(BytesView pt) {
  Bytes nonce(crypto::kAeadNonceSize, 0);
  nonce[0] = send_dir_;
  Bytes ctr;
  put_u64_be(ctr, send_ctr_);
  std::copy(ctr.begin(), ctr.end(), nonce.begin() + 4);

  Bytes frame;
  frame.push_back(send_dir_);
  put_u64_be(frame, send_ctr_);
  append(frame, crypto::aead_seal(key_, nonce, to_bytes(context_), pt));
  send_ctr_ += 1;
  return frame;
}

std::optional<Bytes> ChannelEnd::open(BytesView frame) {
  if (frame.size() < 1 + 8 + crypto::kAeadTagSize) return std::nullopt;
  std::uint8_t peer_dir = send_dir_ == kDirEnclave ? kDirRequester
                                                   : kDirEnclave;
  if (frame[0] != peer_dir) return std::nullopt;
  std::uint64_t ctr = 0;
  for (int i = 0; i < 8; ++i) ctr = ctr << 8 | frame[1 + i];
  if (ctr != recv_ctr_) return std::nullopt;

  Bytes nonce(crypto::kAeadNonceSize, 0);
  nonce[0] = peer_dir;
  std::copy(frame.begin() + 1, frame.begin() + 9, nonce.begin() + 4);
  auto pt = crypto::aead_open(key_, nonce, to_bytes(context_),
                              frame.subspan(9));
  if (!pt) return std::nullopt;
  recv_ctr_ += 1;
  return pt;
}

ChannelEnd accept_channel(const Group& g, const ChannelOffer& offer,
                          const fbs::TracerSessionKey& session,
                          BytesView enclave_public) {
  if (offer.tau != g.encode(session.tau)) {
    fail("channel-mismatch", "offer addresses a different session key");
  }
  if (!crypto::verify_signature(
          enclave_public,
          channel_offer_frame(offer.contract_id, offer.tau,
                              offer.enclave_share),
          offer.sig)) {
    fail("channel-mismatch", "offer signature check failed");
  }
  auto share = g.decode(offer.enclave_share);
  auto shared = g.exp(share, session.iota);
  Bytes key = channel_key(g, offer.contract_id, shared, offer.tau,
                          offer.enclave_share);
  return ChannelEnd(std::move(key), offer.contract_id, kDirRequester);
}

Bytes Platform::export_state() const {
  std::shared_lock lk(instances_mu_);
  FrameWriter w;
  w.bytes(manufacturer_.private_seed());
  w.bytes(service_.private_seed());
  w.u32(static_cast<std::uint32_t>(instances_.size()));
  for (const auto& [cid, inst] : instances_) {
    w.str(cid);
    w.str(inst->kind);
    w.bytes(inst->enclave_key.private_seed());
    w.bytes(inst->input_key.private_seed());
    w.bytes(inst->seal_key);
    w.u64(inst->version);
  }
  return w.take();
}

void Platform::import_state(BytesView state) {
  std::unique_lock lk(instances_mu_);
  FrameReader r(state);
  auto manufacturer = crypto::SigningKey::from_seed(r.bytes());
  auto service = crypto::SigningKey::from_seed(r.bytes());
  std::uint32_t n = r.u32();

  std::map<std::string, std::unique_ptr<Instance>> restored;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string cid = r.str();
    std::string kind = r.str();
    auto enclave_key = crypto::SigningKey::from_seed(r.bytes());
    auto input_key = crypto::BoxKey::from_seed(r.bytes());
    Bytes seal_key = r.bytes();
    std::uint64_t version = r.u64();

    auto factory = kinds_.find(kind);
    if (factory == kinds_.end()) fail("unknown-kind", kind);
    auto inst = std::make_unique<Instance>(std::move(enclave_key),
                                           std::move(input_key),
                                           std::move(seal_key));
    inst->kind = kind;
    inst->logic = factory->second();
    inst->version = version;
    restored.emplace(std::move(cid), std::move(inst));
  }
  r.expect_done();

  manufacturer_ = std::move(manufacturer);
  service_ = std::move(service);
  instances_ = std::move(restored);
}

Bytes encode_sealed_state(const SealedState& st) {
  FrameWriter w;
  w.str(st.contract_id);
  w.u64(st.version);
  w.bytes(st.blob);
  return w.take();
}

SealedState decode_sealed_state(BytesView b) {
  FrameReader r(b);
  SealedState st;
  st.contract_id = r.str();
  st.version = r.u64();
  st.blob = r.bytes();
  r.expect_done();
  return st;
}

Bytes encode_attestation(const Attestation& att) {
  FrameWriter w;
  w.bytes(att.measurement);
  w.str(att.contract_id);
  w.bytes(att.enclave_public);
  w.bytes(att.input_public);
  w.bytes(att.state_init_hash);
  w.bytes(att.enclave_sig);
  w.bytes(att.endorsement);
  return w.take();
}

Attestation decode_attestation(BytesView b) {
  FrameReader r(b);
  Attestation att;
  att.measurement = r.bytes();
  att.contract_id = r.str();
  att.enclave_public = r.bytes();
  att.input_public = r.bytes();
  att.state_init_hash = r.bytes();
  att.enclave_sig = r.bytes();
  att.endorsement = r.bytes();
  r.expect_done();
  return att;
}

Bytes encode_deploy_bundle(const DeployBundle& bundle) {
  FrameWriter w;
  w.str(bundle.kind);
  w.bytes(bundle.init_params);
  w.str(bundle.contract_id);
  w.bytes(encode_sealed_state(bundle.state_init));
  w.bytes(encode_attestation(bundle.attestation));
  w.bytes(bundle.service_proof);
  return w.take();
}

DeployBundle decode_deploy_bundle(BytesView b) {
  FrameReader r(b);
  DeployBundle bundle;
  bundle.kind = r.str();
  bundle.init_params = r.bytes();
  bundle.contract_id = r.str();
  bundle.state_init = decode_sealed_state(r.bytes());
  bundle.attestation = decode_attestation(r.bytes());
  bundle.service_proof = r.bytes();
  r.expect_done();
  return bundle;
}

Bytes encode_channel_offer(const ChannelOffer& offer) {
  FrameWriter w;
  w.str(offer.contract_id);
  w.bytes(offer.tau);
  w.bytes(offer.enclave_share);
  w.bytes(offer.sig);
  return w.take();
}

ChannelOffer decode_channel_offer(BytesView b) {
  FrameReader r(b);
  ChannelOffer offer;
  offer.contract_id = r.str();
  offer.tau = r.bytes();
  offer.enclave_share = r.bytes();
  offer.sig = r.bytes();
  r.expect_done();
  return offer;
}

Bytes bytecode_frame(std::string_view kind, BytesView init_params) {
  FrameWriter w;
  w.str(kind);
  w.bytes(init_params);
  return w.take();
}

Bytes attestation_report_frame(const Attestation& att) {
  FrameWriter w;
  w.str("attest-report");
  w.bytes(att.measurement);
  w.str(att.contract_id);
  w.bytes(att.enclave_public);
  w.bytes(att.input_public);
  w.bytes(att.state_init_hash);
  return w.take();
}

Bytes endorsement_frame(BytesView enclave_public, BytesView measurement) {
  FrameWriter w;
  w.str("enclave-endorsement");
  w.bytes(enclave_public);
  w.bytes(measurement);
  return w.take();
}

Bytes exec_proof_frame(std::string_view contract_id, BytesView input_ct_hash,
                       BytesView output_ct_hash, BytesView old_state_hash,
                       BytesView new_state_hash) {
  FrameWriter w;
  w.str("exec-proof");
  w.str(contract_id);
  w.bytes(input_ct_hash);
  w.bytes(output_ct_hash);
  w.bytes(old_state_hash);
  w.bytes(new_state_hash);
  return w.take();
}

Bytes channel_offer_frame(std::string_view contract_id, BytesView tau,
                          BytesView enclave_share) {
  FrameWriter w;
  w.str("channel-offer");
  w.str(contract_id);
  w.bytes(tau);
  w.bytes(enclave_share);
  return w.take();
}

bool validate_deploy_bundle(const DeployBundle& bundle,
                            BytesView manufacturer_public,
                            BytesView service_public) {
  const Attestation& att = bundle.attestation;
  if (bundle.contract_id != att.contract_id) return false;
  if (att.contract_id != derive_contract_id(att.measurement,
                                            att.enclave_public,
                                            att.input_public)) {
    return false;
  }
  Bytes measurement =
      crypto::sha256(bytecode_frame(bundle.kind, bundle.init_params));
  if (att.measurement != measurement) return false;
  if (!crypto::verify_signature(att.enclave_public,
                                attestation_report_frame(att),
                                att.enclave_sig)) {
    return false;
  }
  if (!crypto::verify_signature(
          manufacturer_public,
          endorsement_frame(att.enclave_public, att.measurement),
          att.endorsement)) {
    return false;
  }
  if (!crypto::verify_signature(service_public, encode_attestation(att),
                                bundle.service_proof)) {
    return false;
  }
  if (bundle.state_init.contract_id != bundle.contract_id ||
      bundle.state_init.version != 0) {
    return false;
  }
  return att.state_init_hash ==
         crypto::sha256(encode_sealed_state(bundle.state_init));
}

Bytes seal_contract_input(BytesView input_public, std::string_view contract_id,
                          BytesView request, Rng& rng) {
  return crypto::box_seal(input_public, request,
                          to_bytes(std::string(contract_id)), rng);
}

}  // namespace fairtrace::enclave
