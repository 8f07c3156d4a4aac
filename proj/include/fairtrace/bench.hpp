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

#ifndef FAIRTRACE_BENCH_HPP_
#define FAIRTRACE_BENCH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fairtrace/group.hpp"
#include "fairtrace/rng.hpp"

// Microbenchmark suite over the five core operations. Wall-clock means
// exclude consensus wait; the latency column reports the simulated block
// clock for one confirmed on-chain trace at depth 3, a calibration of the
// ledger defaults rather than a measured network figure.

namespace fairtrace::bench {

struct BenchRow {
  std::string operation;
  double mean_seconds = 0.0;
  std::uint64_t payload_bytes = 0;
  std::uint64_t meter_units = 0;
  double latency_seconds = 0.0;
};

// Runs all five operations `runs` times each. The chain file at chain_path
// is created fresh for the latency measurements.
std::vector<BenchRow> run_bench(group::Backend backend, std::size_t runs,
                                const std::string& chain_path, Rng& rng);

std::string bench_to_json(group::Backend backend, std::size_t runs,
                          const std::vector<BenchRow>& rows);
std::string bench_to_text(const std::vector<BenchRow>& rows);

}  // namespace fairtrace::bench

#endif  // FAIRTRACE_BENCH_HPP_
