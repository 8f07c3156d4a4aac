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

#ifndef FAIRTRACE_CONTRACT_HPP_
#define FAIRTRACE_CONTRACT_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fairtrace/bytes.hpp"
#include "fairtrace/enclave.hpp"
#include "fairtrace/fbs.hpp"
#include "fairtrace/group.hpp"

// The tracing contract: holds the tracing secret, answers credential and
// identity trace requests, and meters every traced operand. Runs only inside
// an enclave; the secret never appears outside sealed state.

namespace fairtrace::contract {

using group::Group;

inline constexpr std::string_view kTracingKind = "tracing/v1";

enum class Op : std::uint8_t {
  kRegister = 1,
  kTraceCredential = 2,
  kTraceIdentity = 3,
  kBatchCredential = 4,
  kBatchIdentity = 5,
};

struct TraceResponse {
  Op op = Op::kRegister;
  Bytes param_public;  // registration only: encoded y_t
  // Trace ops: (operand, result) pairs in request order.
  std::vector<std::pair<Bytes, Bytes>> entries;
  std::uint64_t meter_delta = 0;
  std::uint64_t meter_total = 0;
};

class TracingLogic : public enclave::ContractLogic {
 public:
  Bytes init(const Group& g, BytesView params, Rng& rng) override;
  std::pair<Bytes, Bytes> step(const Group& g, BytesView state,
                               BytesView input, Rng& rng) override;
};

void register_tracing_kind(enclave::Platform& platform);

Bytes make_init_params(const Group& g, const fbs::IssuerPublic& issuer,
                       std::uint32_t result_cap = 1024);

Bytes make_register_request();
// Test hook: fixes the tracing secret instead of sampling it. The seed only
// ever travels inside the encrypted request.
Bytes make_register_request_seeded(BytesView x_t_enc);
Bytes make_trace_request(Op op, BytesView operand);
Bytes make_batch_request(Op op, const std::vector<Bytes>& operands);

TraceResponse parse_response(BytesView frame);
Bytes encode_response(const TraceResponse& resp);

}  // namespace fairtrace::contract

#endif  // FAIRTRACE_CONTRACT_HPP_
