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

#include "fairtrace/store.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fairtrace/errors.hpp"
#include "json.hpp"

namespace fairtrace::store {

using nlohmann::json;

namespace {

json parse_object(std::string_view text, const char* what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    fail("malformed-file", std::string(what) + " is not a JSON object");
  }
  return doc;
}

std::string str_field(const json& doc, const char* key, const char* what) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) {
    fail("malformed-file",
         std::string(what) + " missing string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

Bytes hex_field(const json& doc, const char* key, const char* what) {
  auto decoded = hex_decode(str_field(doc, key, what));
  if (!decoded) {
    fail("malformed-file",
         std::string(what) + " field \"" + key + "\" is not hex");
  }
  return *decoded;
}

std::uint64_t u64_field(const json& doc, const char* key, const char* what) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_number_unsigned()) {
    fail("malformed-file",
         std::string(what) + " missing unsigned field \"" + key + "\"");
  }
  return it->get<std::uint64_t>();
}

}  // namespace

void ensure_home(const Paths& paths) {
  std::error_code ec;
  std::filesystem::create_directories(paths.home, ec);
  if (ec) {
    fail("io-error", "cannot create " + paths.home + ": " + ec.message());
  }
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::exists(path, ec);
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail("io-error", "cannot open " + path + " for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) {
    fail("io-error", "write failed for " + path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail("io-error", "cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string config_to_json(const HomeConfig& cfg) {
  json doc;
  doc["backend"] = cfg.backend;
  doc["confirmation_depth"] = cfg.confirmation_depth;
  doc["validator_count"] = cfg.validator_count;
  doc["timed"] = cfg.timed;
  doc["block_interval_ms"] = cfg.block_interval_ms;
  doc["rate_threshold"] = cfg.rate_threshold;
  doc["rate_window_blocks"] = cfg.rate_window_blocks;
  return doc.dump(2) + "\n";
}

HomeConfig config_from_json(std::string_view text) {
  json doc = parse_object(text, "config");
  HomeConfig cfg;
  cfg.backend = str_field(doc, "backend", "config");
  if (cfg.backend != "ec" && cfg.backend != "toy") {
    fail("malformed-file", "config backend must be \"ec\" or \"toy\"");
  }
  cfg.confirmation_depth = u64_field(doc, "confirmation_depth", "config");
  cfg.validator_count =
      static_cast<std::uint32_t>(u64_field(doc, "validator_count", "config"));
  auto timed = doc.find("timed");
  if (timed == doc.end() || !timed->is_boolean()) {
    fail("malformed-file", "config missing boolean field \"timed\"");
  }
  cfg.timed = timed->get<bool>();
  cfg.block_interval_ms = u64_field(doc, "block_interval_ms", "config");
  cfg.rate_threshold = u64_field(doc, "rate_threshold", "config");
  cfg.rate_window_blocks = u64_field(doc, "rate_window_blocks", "config");
  return cfg;
}

std::string issuer_key_to_json(const Group& g, const fbs::IssuerKey& key) {
  json doc;
  doc["x"] = hex_encode(g.encode_scalar(key.x));
  doc["y"] = hex_encode(g.encode(key.y));
  doc["z"] = hex_encode(g.encode(key.z));
  return doc.dump(2) + "\n";
}

fbs::IssuerKey issuer_key_from_json(const Group& g, std::string_view text) {
  json doc = parse_object(text, "issuer key");
  fbs::IssuerKey key;
  key.x = g.decode_scalar(hex_field(doc, "x", "issuer key"));
  key.y = g.decode(hex_field(doc, "y", "issuer key"));
  key.z = g.decode(hex_field(doc, "z", "issuer key"));
  return key;
}

std::string user_identity_to_json(const Group& g,
                                  const fbs::UserIdentity& user) {
  json doc;
  doc["gamma"] = hex_encode(g.encode_scalar(user.gamma));
  doc["xi"] = hex_encode(g.encode(user.xi));
  doc["label"] = user.label;
  return doc.dump(2) + "\n";
}

fbs::UserIdentity user_identity_from_json(const Group& g,
                                          std::string_view text) {
  json doc = parse_object(text, "user identity");
  fbs::UserIdentity user;
  user.gamma = g.decode_scalar(hex_field(doc, "gamma", "user identity"));
  user.xi = g.decode(hex_field(doc, "xi", "user identity"));
  user.label = str_field(doc, "label", "user identity");
  return user;
}

std::string registry_to_json(const Group& g,
                             const fbs::SessionRegistry& registry) {
  json entries = json::array();
  for (const auto& [session_id, entry] : registry.entries()) {
    json row;
    row["session_id"] = hex_encode(session_id);
    row["xi"] = hex_encode(g.encode(entry.xi));
    row["label"] = entry.label;
    row["issued_at"] = entry.issued_at;
    entries.push_back(std::move(row));
  }
  json doc;
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

void registry_from_json(const Group& g, std::string_view text,
                        fbs::SessionRegistry& registry) {
  json doc = parse_object(text, "registry");
  auto it = doc.find("entries");
  if (it == doc.end() || !it->is_array()) {
    fail("malformed-file", "registry missing array field \"entries\"");
  }
  for (const auto& row : *it) {
    if (!row.is_object()) {
      fail("malformed-file", "registry entry is not an object");
    }
    auto session_id = g.decode(hex_field(row, "session_id", "registry entry"));
    fbs::RegistryEntry entry;
    entry.xi = g.decode(hex_field(row, "xi", "registry entry"));
    entry.label = str_field(row, "label", "registry entry");
    entry.issued_at = u64_field(row, "issued_at", "registry entry");
    registry.record(g, session_id, entry);
  }
}

std::string contract_info_to_json(const Group& g, const ContractInfo& info) {
  json doc;
  doc["bundle"] = hex_encode(enclave::encode_deploy_bundle(info.bundle));
  doc["y_t"] = hex_encode(g.encode(info.y_t));
  return doc.dump(2) + "\n";
}

ContractInfo contract_info_from_json(const Group& g, std::string_view text) {
  json doc = parse_object(text, "contract info");
  ContractInfo info;
  info.bundle = enclave::decode_deploy_bundle(hex_field(doc, "bundle",
                                                        "contract info"));
  info.y_t = g.decode(hex_field(doc, "y_t", "contract info"));
  return info;
}

void save_platform(const std::string& path,
                   const enclave::Platform& platform) {
  json doc;
  doc["state"] = hex_encode(platform.export_state());
  write_text_file(path, doc.dump() + "\n");
}

void load_platform(const std::string& path, enclave::Platform& platform) {
  json doc = parse_object(read_text_file(path), "platform state");
  platform.import_state(hex_field(doc, "state", "platform state"));
}

}  // namespace fairtrace::store
