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

#ifndef FAIRTRACE_PARTIES_HPP_
#define FAIRTRACE_PARTIES_HPP_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairtrace/bytes.hpp"
#include "fairtrace/contract.hpp"
#include "fairtrace/enclave.hpp"
#include "fairtrace/fbs.hpp"
#include "fairtrace/group.hpp"
#include "fairtrace/ledger.hpp"
#include "fairtrace/rng.hpp"
#include "fairtrace/transport.hpp"

// The actors of the system as protocol drivers. Issuer, verifier, node and
// inspector are services that answer messages on a connection; user and
// tracer flows are client functions that drive a connection to completion.
// Issuance and verification never touch the chain; every trace costs exactly
// one confirmed transaction and its plaintext result only ever travels
// through the enclave channel, after confirmation.

namespace fairtrace::parties {

using contract::Op;
using enclave::ConfirmationReceipt;
using group::Group;
using group::GroupElement;
using transport::Conn;
using transport::Message;

// Message types on the wire.
inline constexpr const char* kIssue1 = "ISSUE1";
inline constexpr const char* kIssue2 = "ISSUE2";
inline constexpr const char* kIssue3 = "ISSUE3";
inline constexpr const char* kIssue4 = "ISSUE4";
inline constexpr const char* kShow = "SHOW";
inline constexpr const char* kTraceReq = "TRACE_REQ";
inline constexpr const char* kTraceAck = "TRACE_ACK";
inline constexpr const char* kTraceResult = "TRACE_RESULT";
inline constexpr const char* kInspectReq = "INSPECT_REQ";
inline constexpr const char* kInspectReport = "INSPECT_REPORT";

// Issuing service. Holds the signing key and the registry of completed
// sessions; unfinished sessions die with their connection.
class IssuerActor {
 public:
  IssuerActor(const Group& g, fbs::IssuerKey key, GroupElement y_t,
              BytesView rng_seed);

  void serve(Conn& conn);
  Message handle(const Message& m);

  const fbs::IssuerPublic& issuer() const { return pub_; }
  fbs::SessionRegistry& registry() { return registry_; }
  const fbs::SessionRegistry& registry() const { return registry_; }
  std::size_t pending_sessions() const;

 private:
  const Group& g_;
  fbs::IssuerKey key_;
  fbs::IssuerPublic pub_;
  GroupElement y_t_;
  DrbgRng rng_;
  fbs::SessionRegistry registry_;
  mutable std::mutex mu_;
  std::map<std::string, fbs::IssuerSession> sessions_;
  std::uint64_t issue_counter_ = 0;
};

// Credential checking service.
class VerifierActor {
 public:
  VerifierActor(const Group& g, fbs::IssuerPublic issuer)
      : g_(g), issuer_(std::move(issuer)) {}

  void serve(Conn& conn);
  Message handle(const Message& m);

 private:
  const Group& g_;
  fbs::IssuerPublic issuer_;
};

// Chain gateway: executes trace requests in the enclave, records them on the
// ledger, and releases results over the channel once confirmed.
class NodeActor {
 public:
  NodeActor(enclave::Platform& platform, ledger::Ledger& chain,
            std::string contract_id, enclave::SealedState state);

  void serve(Conn& conn);
  Message handle(const Message& m);

  const enclave::SealedState& state() const { return state_; }

 private:
  struct PendingRelease {
    GroupElement tau;
    Bytes output_ct;
  };

  enclave::Platform& platform_;
  ledger::Ledger& chain_;
  std::string cid_;
  enclave::SealedState state_;
  mutable std::mutex mu_;
  std::map<std::string, PendingRelease> pending_;
};

// Trace requester. Validates the deployment it talks to once, at
// construction; every trace uses a fresh session key and channel.
class TracerActor {
 public:
  TracerActor(const Group& g, enclave::DeployBundle bundle,
              BytesView manufacturer_public, BytesView service_public,
              Bytes caller, BytesView rng_seed);

  const Bytes& caller() const { return caller_; }
  const std::string& contract_id() const { return bundle_.contract_id; }
  const Group& group() const { return g_; }

  // Runs the full request/confirm/release exchange for one trace
  // transaction and returns the decrypted contract response.
  contract::TraceResponse trace(Conn& node, Op op,
                                const std::vector<Bytes>& operands,
                                ConfirmationReceipt* receipt = nullptr);

 private:
  const Group& g_;
  enclave::DeployBundle bundle_;
  Bytes caller_;
  DrbgRng rng_;
};

// Inspection policy; rules (a), (b) and (d) are always active, (c) only when
// a permitted time window is set.
struct InspectionPolicy {
  std::vector<Bytes> tracer_allowlist;
  std::uint64_t rate_threshold = 20;
  std::uint64_t rate_window_blocks = 100;
  std::optional<std::uint64_t> permitted_from_ms;
  std::optional<std::uint64_t> permitted_to_ms;
};

struct AuditEntry {
  Bytes txid;
  std::uint64_t height = 0;
  std::string contract_id;
  ledger::TxKind kind = ledger::TxKind::kTraceCredential;
  Bytes caller;
  std::uint64_t timestamp = 0;
};

struct Anomaly {
  std::string rule;  // "a".."d"
  Bytes caller;      // empty for rule d
  std::uint64_t height = 0;
  std::string detail;
};

struct AuditReport {
  std::string contract_id;
  std::uint64_t window_from = 0;
  std::uint64_t window_to = 0;
  std::vector<AuditEntry> entries;
  std::map<std::string, std::uint64_t> count_by_kind;
  std::map<std::string, std::uint64_t> count_by_caller;
  std::vector<Anomaly> anomalies;
  bool chain_ok = true;
  std::uint64_t first_bad_height = 0;
};

// Pure function of the chain contents and the policy: collects every
// confirmed trace transaction of the contract within [from, to] heights.
AuditReport run_inspection(const ledger::Ledger& chain,
                           const std::string& contract_id,
                           std::uint64_t from_height,
                           std::uint64_t to_height,
                           const InspectionPolicy& policy);

// Canonical serialization: object keys sorted, arrays in chain order.
std::string report_to_json(const AuditReport& report);

// Ledger reading service wrapping run_inspection.
class InspectorActor {
 public:
  InspectorActor(const ledger::Ledger& chain, InspectionPolicy policy)
      : chain_(chain), policy_(std::move(policy)) {}

  void serve(Conn& conn);
  Message handle(const Message& m);

 private:
  const ledger::Ledger& chain_;
  InspectionPolicy policy_;
};

// Client flows.

fbs::Credential run_issuance(Conn& issuer, const Group& g,
                             const fbs::IssuerPublic& issuer_pub,
                             const GroupElement& y_t,
                             const fbs::UserIdentity& user, BytesView m,
                             Rng& rng);

bool run_verification(Conn& verifier, const Group& g,
                      const fbs::Credential& cred);

struct CredentialTraceResult {
  GroupElement zeta1;
  ConfirmationReceipt receipt;
  std::uint64_t meter_delta = 0;
};
CredentialTraceResult run_trace_credential(TracerActor& tracer, Conn& node,
                                           const GroupElement& session_element);

struct IdentityTraceResult {
  GroupElement session_element;
  std::string label;
  ConfirmationReceipt receipt;
};
IdentityTraceResult run_trace_identity(TracerActor& tracer, Conn& node,
                                       const GroupElement& zeta1,
                                       const fbs::SessionRegistry& registry);

struct BatchTraceResult {
  std::vector<std::pair<GroupElement, GroupElement>> entries;
  ConfirmationReceipt receipt;
};
BatchTraceResult run_batch_trace(TracerActor& tracer, Conn& node, Op op,
                                 const std::vector<GroupElement>& operands);

// Returns the inspector's canonical report serialization.
std::string run_inspection_remote(Conn& inspector,
                                  const std::string& contract_id,
                                  std::uint64_t from_height,
                                  std::uint64_t to_height);

// Deploys the tracing contract, records the deployment, then registers the
// tracing parameter through the full execute/confirm/release path. The
// optional seed fixes the tracing secret and only ever travels inside the
// encrypted register request.
struct TracingSetup {
  enclave::DeployBundle bundle;
  enclave::SealedState state;
  GroupElement y_t;
};
TracingSetup setup_tracing_contract(enclave::Platform& platform,
                                    ledger::Ledger& chain,
                                    const fbs::IssuerPublic& issuer,
                                    const Bytes& deployer, Rng& rng,
                                    std::optional<Bytes> x_t_seed =
                                        std::nullopt);

// Recovers the contract's current sealed state from the newest confirmed
// transaction that carries one, falling back to the deployed initial state.
enclave::SealedState latest_contract_state(const ledger::Ledger& chain,
                                           const std::string& contract_id,
                                           const enclave::DeployBundle&
                                               bundle);

}  // namespace fairtrace::parties

#endif  // FAIRTRACE_PARTIES_HPP_
