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

#ifndef FAIRTRACE_STORE_HPP_
#define FAIRTRACE_STORE_HPP_

#include <cstdint>
#include <string>

#include "fairtrace/bytes.hpp"
#include "fairtrace/enclave.hpp"
#include "fairtrace/fbs.hpp"
#include "fairtrace/group.hpp"

// File persistence for a deployment home directory. Keys and credentials are
// JSON documents with hex fields; the chain is the ledger's binary block
// file; platform.json is the enclave's private disk and never leaves the
// operator's machine.

namespace fairtrace::store {

using group::Group;

struct Paths {
  std::string home;

  std::string config() const { return home + "/config.json"; }
  std::string issuer_key() const { return home + "/issuer.json"; }
  std::string registry() const { return home + "/registry.json"; }
  std::string platform() const { return home + "/platform.json"; }
  std::string contract() const { return home + "/contract.json"; }
  std::string chain() const { return home + "/chain.bin"; }
  std::string user_key(const std::string& label) const {
    return home + "/user-" + label + ".json";
  }
};

// Creates the home directory if needed.
void ensure_home(const Paths& paths);
bool file_exists(const std::string& path);

void write_text_file(const std::string& path, std::string_view text);
std::string read_text_file(const std::string& path);

struct HomeConfig {
  std::string backend = "ec";  // "ec" or "toy"
  std::uint64_t confirmation_depth = 2;
  std::uint32_t validator_count = 4;
  bool timed = false;
  std::uint64_t block_interval_ms = 6000;
  std::uint64_t rate_threshold = 20;
  std::uint64_t rate_window_blocks = 100;
};

std::string config_to_json(const HomeConfig& cfg);
HomeConfig config_from_json(std::string_view text);

std::string issuer_key_to_json(const Group& g, const fbs::IssuerKey& key);
fbs::IssuerKey issuer_key_from_json(const Group& g, std::string_view text);

std::string user_identity_to_json(const Group& g,
                                  const fbs::UserIdentity& user);
fbs::UserIdentity user_identity_from_json(const Group& g,
                                          std::string_view text);

std::string registry_to_json(const Group& g,
                             const fbs::SessionRegistry& registry);
void registry_from_json(const Group& g, std::string_view text,
                        fbs::SessionRegistry& registry);

// Public description of the deployed contract: the attested bundle plus the
// published tracing parameter.
struct ContractInfo {
  enclave::DeployBundle bundle;
  group::GroupElement y_t;
};

std::string contract_info_to_json(const Group& g, const ContractInfo& info);
ContractInfo contract_info_from_json(const Group& g, std::string_view text);

void save_platform(const std::string& path,
                   const enclave::Platform& platform);
void load_platform(const std::string& path, enclave::Platform& platform);

}  // namespace fairtrace::store

#endif  // FAIRTRACE_STORE_HPP_
