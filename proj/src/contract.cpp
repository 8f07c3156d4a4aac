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

#include "fairtrace/contract.hpp"

#include <algorithm>

#include "fairtrace/errors.hpp"

namespace fairtrace::contract {
namespace {

// Marker at the head of the plaintext state, so confinement tests can scan
// emitted bytes for accidental sealed-state leaks.
constexpr std::string_view kStateMagic = "FTCS1";

struct State {
  Bytes y;
  Bytes z;
  std::uint32_t cap = 0;
  bool registered = false;
  Bytes x_t;
  Bytes y_t;
  std::uint64_t meter = 0;
  std::vector<std::pair<Bytes, Bytes>> cred_results;
  std::vector<std::pair<Bytes, Bytes>> id_results;
};

void write_results(FrameWriter& w,
                   const std::vector<std::pair<Bytes, Bytes>>& m) {
  w.u32(static_cast<std::uint32_t>(m.size()));
  for (const auto& [k, v] : m) {
    w.bytes(k);
    w.bytes(v);
  }
}

std::vector<std::pair<Bytes, Bytes>> read_results(FrameReader& r) {
  std::vector<std::pair<Bytes, Bytes>> m;
  std::uint32_t n = r.u32();
  m.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Bytes k = r.bytes();
    Bytes v = r.bytes();
    m.emplace_back(std::move(k), std::move(v));
  }
  return m;
}

Bytes encode_state(const State& st) {
  FrameWriter w;
  w.str(kStateMagic);
  w.bytes(st.y);
  w.bytes(st.z);
  w.u32(st.cap);
  w.u8(st.registered ? 1 : 0);
  w.bytes(st.x_t);
  w.bytes(st.y_t);
  w.u64(st.meter);
  write_results(w, st.cred_results);
  write_results(w, st.id_results);
  return w.take();
}

State decode_state(BytesView b) {
  FrameReader r(b);
  if (r.str() != kStateMagic) fail("malformed-frame", "bad state magic");
  State st;
  st.y = r.bytes();
  st.z = r.bytes();
  st.cap = r.u32();
  st.registered = r.u8() != 0;
  st.x_t = r.bytes();
  st.y_t = r.bytes();
  st.meter = r.u64();
  st.cred_results = read_results(r);
  st.id_results = read_results(r);
  r.expect_done();
  return st;
}

// Insertion-ordered map with least-recently-written eviction at cap.
void record_result(std::vector<std::pair<Bytes, Bytes>>& m, Bytes key,
                   Bytes value, std::uint32_t cap) {
  auto it = std::find_if(m.begin(), m.end(),
                         [&](const auto& e) { return e.first == key; });
  if (it != m.end()) m.erase(it);
  m.emplace_back(std::move(key), std::move(value));
  while (m.size() > cap) m.erase(m.begin());
}

group::GroupElement decode_operand(const Group& g, BytesView enc,
                                   std::size_t index) {
  auto el = g.try_decode(enc);
  if (!el) fail("bad-operand", "operand " + std::to_string(index));
  return *std::move(el);
}

TraceResponse run_register(const Group& g, State& st, FrameReader& r,
                           Rng& rng) {
  if (st.registered) fail("already-registered", "tracing key already set");
  bool seeded = r.u8() != 0;
  Bytes seed;
  if (seeded) seed = r.bytes();
  r.expect_done();

  group::Scalar x_t;
  if (seeded) {
    auto s = g.try_decode_scalar(seed);
    if (!s || s->is_zero()) fail("bad-operand", "seed");
    x_t = *s;
  } else {
    x_t = g.random_scalar_nonzero(rng);
  }
  st.registered = true;
  st.x_t = g.encode_scalar(x_t);
  st.y_t = g.encode(g.exp(g.generator(), x_t));

  TraceResponse resp;
  resp.op = Op::kRegister;
  resp.param_public = st.y_t;
  resp.meter_total = st.meter;
  return resp;
}

TraceResponse run_trace(const Group& g, State& st, Op op, FrameReader& r) {
  if (!st.registered) fail("not-registered", "tracing key not set");

  bool credential =
      op == Op::kTraceCredential || op == Op::kBatchCredential;
  bool batch = op == Op::kBatchCredential || op == Op::kBatchIdentity;

  std::vector<Bytes> operand_enc;
  if (batch) {
    std::uint32_t n = r.u32();
    if (n == 0) fail("empty-batch", "batch carries no operands");
    operand_enc.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) operand_enc.push_back(r.bytes());
  } else {
    operand_enc.push_back(r.bytes());
  }
  r.expect_done();

  // Validate every operand before any state write.
  std::vector<group::GroupElement> operands;
  operands.reserve(operand_enc.size());
  for (std::size_t i = 0; i < operand_enc.size(); ++i) {
    operands.push_back(decode_operand(g, operand_enc[i], i));
  }

  auto x_t = g.decode_scalar(st.x_t);
  auto exponent = credential ? x_t : g.sc_inv(x_t);

  TraceResponse resp;
  resp.op = op;
  for (std::size_t i = 0; i < operands.size(); ++i) {
    Bytes result = g.encode(g.exp(operands[i], exponent));
    auto& m = credential ? st.cred_results : st.id_results;
    record_result(m, operand_enc[i], result, st.cap);
    resp.entries.emplace_back(operand_enc[i], std::move(result));
  }
  st.meter += operands.size();
  resp.meter_delta = operands.size();
  resp.meter_total = st.meter;
  return resp;
}

}  // namespace

Bytes TracingLogic::init(const Group& g, BytesView params, Rng& rng) {
  (void)rng;
  FrameReader r(params);
  State st;
  st.y = r.bytes();
  st.z = r.bytes();
  st.cap = r.u32();
  r.expect_done();
  if (st.cap == 0) fail("malformed-frame", "zero result cap");
  // Issuer key must decode in this group.
  g.decode(st.y);
  g.decode(st.z);
  return encode_state(st);
}

std::pair<Bytes, Bytes> TracingLogic::step(const Group& g, BytesView state,
                                           BytesView input, Rng& rng) {
  State st = decode_state(state);
  FrameReader r(input);
  Op op = static_cast<Op>(r.u8());

  TraceResponse resp;
  switch (op) {
    case Op::kRegister:
      resp = run_register(g, st, r, rng);
      break;
    case Op::kTraceCredential:
    case Op::kTraceIdentity:
    case Op::kBatchCredential:
    case Op::kBatchIdentity:
      resp = run_trace(g, st, op, r);
      break;
    default:
      fail("malformed-frame", "unknown operation");
  }
  return {encode_state(st), encode_response(resp)};
}

void register_tracing_kind(enclave::Platform& platform) {
  platform.register_kind(std::string(kTracingKind), [] {
    return std::make_unique<TracingLogic>();
  });
}

Bytes make_init_params(const Group& g, const fbs::IssuerPublic& issuer,
                       std::uint32_t result_cap) {
  FrameWriter w;
  w.bytes(g.encode(issuer.y));
  w.bytes(g.encode(issuer.z));
  w.u32(result_cap);
  return w.take();
}

Bytes make_register_request() {
  FrameWriter w;
  w.u8(static_cast<std::uint8_t>(Op::kRegister));
  w.u8(0);
  return w.take();
}

Bytes make_register_request_seeded(BytesView x_t_enc) {
  FrameWriter w;
  w.u8(static_cast<std::uint8_t>(Op::kRegister));
  w.u8(1);
  w.bytes(x_t_enc);
  return w.take();
}

Bytes make_trace_request(Op op, BytesView operand) {
  if (op != Op::kTraceCredential && op != Op::kTraceIdentity) {
    fail("malformed-frame", "not a single-trace operation");
  }
  FrameWriter w;
  w.u8(static_cast<std::uint8_t>(op));
  w.bytes(operand);
  return w.take();
}

Bytes make_batch_request(Op op, const std::vector<Bytes>& operands) {
  if (op != Op::kBatchCredential && op != Op::kBatchIdentity) {
    fail("malformed-frame", "not a batch operation");
  }
  FrameWriter w;
  w.u8(static_cast<std::uint8_t>(op));
  w.u32(static_cast<std::uint32_t>(operands.size()));
  for (const auto& o : operands) w.bytes(o);
  return w.take();
}

Bytes encode_response(const TraceResponse& resp) {
  FrameWriter w;
  w.u8(static_cast<std::uint8_t>(resp.op));
  if (resp.op == Op::kRegister) {
    w.bytes(resp.param_public);
  } else {
    w.u32(static_cast<std::uint32_t>(resp.entries.size()));
    for (const auto& [operand, result] : resp.entries) {
      w.bytes(operand);
      w.bytes(result);
    }
  }
  w.u64(resp.meter_delta);
  w.u64(resp.meter_total);
  return w.take();
}

TraceResponse parse_response(BytesView frame) {
  FrameReader r(frame);
  TraceResponse resp;
  resp.op = static_cast<Op>(r.u8());
  if (resp.op == Op::kRegister) {
    resp.param_public = r.bytes();
  } else {
    std::uint32_t n = r.u32();
    resp.entries.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      Bytes operand = r.bytes();
      Bytes result = r.bytes();
      resp.entries.emplace_back(std::move(operand), std::move(result));
    }
  }
  resp.meter_delta = r.u64();
  resp.meter_total = r.u64();
  r.expect_done();
  return resp;
}

}  // namespace fairtrace::contract
