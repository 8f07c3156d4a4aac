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

#ifndef FAIRTRACE_TESTS_TOY_ORACLE_HPP_
#define FAIRTRACE_TESTS_TOY_ORACLE_HPP_

// Independent reference arithmetic for the toy group: order-11 subgroup of
// Z_23^*, generator 2, second generator 3. Written from scratch on purpose.
// Nothing here may include or call the library under test.

#include <cstdint>
#include <set>

namespace toy_oracle {

constexpr std::uint64_t kP = 23;
constexpr std::uint64_t kQ = 11;
constexpr std::uint64_t kG = 2;
constexpr std::uint64_t kH = 3;

// Naive square-and-multiply.
inline std::uint64_t modexp(std::uint64_t base, std::uint64_t e,
                            std::uint64_t m) {
  std::uint64_t r = 1 % m;
  base %= m;
  while (e > 0) {
    if (e & 1) r = (r * base) % m;
    base = (base * base) % m;
    e >>= 1;
  }
  return r;
}

// Brute-force inverse mod q.
inline std::uint64_t scalar_inv(std::uint64_t a) {
  for (std::uint64_t x = 1; x < kQ; x++)
    if ((a * x) % kQ == 1) return x;
  return 0;
}

inline std::set<std::uint64_t> subgroup() {
  std::set<std::uint64_t> s;
  for (std::uint64_t e = 0; e < kQ; e++) s.insert(modexp(kG, e, kP));
  return s;
}

}  // namespace toy_oracle

#endif  // FAIRTRACE_TESTS_TOY_ORACLE_HPP_
