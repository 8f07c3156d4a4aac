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

// Exercises the system exclusively through the shared-library C boundary,
// the way the command-line front end does.

#include "fairtrace.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct CStr {
  char* p = nullptr;
  ~CStr() { ft_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Ctx {
  ft_ctx* c;
  Ctx(const std::string& home, const char* backend)
      : c(ft_ctx_new(home.c_str(), backend)) {}
  ~Ctx() { ft_ctx_free(c); }
  operator ft_ctx*() const { return c; }
  std::string err() const { return ft_last_error(c); }
};

std::string temp_home(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("fairtrace-capi-" + tag);
  std::filesystem::remove_all(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string first_session_id(const std::string& home) {
  auto doc = json::parse(slurp(home + "/registry.json"));
  REQUIRE(doc["entries"].size() > 0);
  return doc["entries"][0]["session_id"].get<std::string>();
}

TEST_CASE("full lifecycle through the C interface") {
  auto home = temp_home("lifecycle");
  Ctx ctx(home, "ec");

  REQUIRE(ctx.err() == "");
  REQUIRE(ft_setup(ctx) == FT_OK);
  CHECK(std::filesystem::exists(home + "/config.json"));
  CHECK(std::filesystem::exists(home + "/platform.json"));
  CHECK(std::filesystem::exists(home + "/chain.bin"));

  CHECK(ft_setup(ctx) == FT_ERR_USAGE);
  CHECK(ctx.err().find("already set up") != std::string::npos);

  REQUIRE(ft_keygen_issuer(ctx, nullptr) == FT_OK);
  REQUIRE(ft_keygen_user(ctx, "alice", nullptr) == FT_OK);
  auto issuer_doc = json::parse(slurp(home + "/issuer.json"));
  CHECK(issuer_doc.contains("x"));
  CHECK(issuer_doc.contains("y"));
  CHECK(issuer_doc.contains("z"));

  CStr cid;
  REQUIRE(ft_deploy(ctx, &cid.p) == FT_OK);
  CHECK(cid.str().size() == 32);  // hex of the 16-byte contract id
  CHECK(ft_deploy(ctx, nullptr) == FT_ERR_USAGE);

  std::string cred_path = home + "/alice.cred";
  REQUIRE(ft_issue(ctx, (home + "/user-alice.json").c_str(), "hello world",
                   cred_path.c_str()) == FT_OK);
  auto cred_doc = json::parse(slurp(cred_path));
  for (const char* key : {"zeta1", "rho", "omega_bar", "sigma1", "sigma2",
                          "delta", "m"}) {
    CHECK(cred_doc.contains(key));
  }

  int ok = 0;
  REQUIRE(ft_verify(ctx, cred_path.c_str(), &ok) == FT_OK);
  CHECK(ok == 1);

  // A mutated message must not verify.
  auto broken = cred_doc;
  broken["m"] = "b3RoZXI=";  // "other"
  std::ofstream(home + "/broken.cred") << broken.dump();
  ok = 1;
  REQUIRE(ft_verify(ctx, (home + "/broken.cred").c_str(), &ok) == FT_OK);
  CHECK(ok == 0);

  auto session_hex = first_session_id(home);

  CStr traced;
  REQUIRE(ft_trace_credential(ctx, nullptr, session_hex.c_str(),
                              &traced.p) == FT_OK);
  auto traced_doc = json::parse(traced.str());
  CHECK(traced_doc["meter_delta"] == 1);
  CHECK(traced_doc["depth"].get<std::uint64_t>() >= 2);
  CHECK(traced_doc["zeta1"] == cred_doc["zeta1"]);
  std::string zeta1_hex = traced_doc["zeta1"].get<std::string>();

  CStr identified;
  REQUIRE(ft_trace_identity(ctx, nullptr, zeta1_hex.c_str(),
                            &identified.p) == FT_OK);
  auto identified_doc = json::parse(identified.str());
  CHECK(identified_doc["label"] == "alice");
  CHECK(identified_doc["session_id"] == session_hex);

  // Batch of one equals the single trace.
  const char* operands[] = {session_hex.c_str()};
  CStr batch;
  REQUIRE(ft_trace_batch(ctx, nullptr, "cred", operands, 1, &batch.p) ==
          FT_OK);
  auto batch_doc = json::parse(batch.str());
  REQUIRE(batch_doc["entries"].size() == 1);
  CHECK(batch_doc["entries"][0]["operand"] == session_hex);
  CHECK(batch_doc["entries"][0]["result"] == zeta1_hex);

  // Feeding a session element to the identity trace resolves to no
  // registered user; the transaction still lands on the chain first.
  CStr never;
  int rc = ft_trace_identity(ctx, nullptr, session_hex.c_str(), &never.p);
  CHECK(rc == FT_ERR_PROTOCOL);
  CHECK(ctx.err().find("unknown-session") != std::string::npos);

  CStr report;
  REQUIRE(ft_inspect(ctx, nullptr, 0, UINT64_MAX, &report.p) == FT_OK);
  auto report_doc = json::parse(report.str());
  CHECK(report_doc["entries"].size() == 4);
  CHECK(report_doc["summary"]["by_kind"]["trace-credential"] == 1);
  CHECK(report_doc["summary"]["by_kind"]["trace-identity"] == 2);
  CHECK(report_doc["summary"]["by_kind"]["batch"] == 1);
  CHECK(report_doc["anomalies"].size() == 0);
  CHECK(report_doc["chain"]["ok"] == true);

  // Inspecting by explicit contract id gives the identical report.
  CStr report2;
  REQUIRE(ft_inspect(ctx, cid.str().c_str(), 0, UINT64_MAX, &report2.p) ==
          FT_OK);
  CHECK(report2.str() == report.str());

  CStr chain_ok;
  REQUIRE(ft_ledger_verify(ctx, &chain_ok.p) == FT_OK);
  CHECK(json::parse(chain_ok.str())["ok"] == true);

  // Any flipped byte is caught.
  {
    std::fstream f(home + "/chain.bin",
                   std::ios::binary | std::ios::in | std::ios::out);
    f.seekg(0, std::ios::end);
    auto size = static_cast<std::streamoff>(f.tellg());
    f.seekp(size / 2);
    char b = 0;
    f.seekg(size / 2);
    f.read(&b, 1);
    b = static_cast<char>(b ^ 0x01);
    f.seekp(size / 2);
    f.write(&b, 1);
  }
  CStr chain_bad;
  REQUIRE(ft_ledger_verify(ctx, &chain_bad.p) == FT_OK);
  auto bad_doc = json::parse(chain_bad.str());
  CHECK(bad_doc["ok"] == false);
  CHECK(bad_doc["first_bad_height"].get<std::uint64_t>() >= 1);
}

TEST_CASE("prerequisite and argument errors") {
  auto home = temp_home("errors");
  Ctx ctx(home, nullptr);

  CHECK(ft_keygen_issuer(ctx, nullptr) == FT_ERR_STATE);
  CHECK(ctx.err().find("not-setup") != std::string::npos);

  CStr out;
  CHECK(ft_trace_credential(ctx, nullptr, "00", &out.p) == FT_ERR_STATE);
  CHECK(ctx.err().find("not-setup") != std::string::npos);

  REQUIRE(ft_setup(ctx) == FT_OK);
  CHECK(ft_keygen_user(ctx, nullptr, nullptr) == FT_ERR_USAGE);
  CHECK(ft_keygen_user(ctx, "", nullptr) == FT_ERR_USAGE);

  // Deployed contract is a precondition for tracing.
  CHECK(ft_trace_credential(ctx, nullptr, "00", &out.p) == FT_ERR_STATE);
  CHECK(ctx.err().find("not-registered") != std::string::npos);

  CHECK(ft_trace_batch(ctx, nullptr, "sideways", nullptr, 0, &out.p) ==
        FT_ERR_USAGE);
  CHECK(ft_trace_batch(ctx, nullptr, "cred", nullptr, 0, &out.p) ==
        FT_ERR_USAGE);

  Ctx wrong(home, "toy");
  CHECK(ft_keygen_issuer(wrong, nullptr) == FT_ERR_USAGE);
  CHECK(wrong.err().find("conflicts") != std::string::npos);

  Ctx bogus(temp_home("bogus"), "rsa");
  CHECK(ft_setup(bogus) == FT_ERR_USAGE);
  CHECK(bogus.err().find("backend") != std::string::npos);
}

TEST_CASE("toy backend lifecycle") {
  auto home = temp_home("toy");
  Ctx ctx(home, "toy");

  REQUIRE(ft_setup(ctx) == FT_OK);
  REQUIRE(ft_keygen_issuer(ctx, nullptr) == FT_OK);
  REQUIRE(ft_keygen_user(ctx, "tiny", nullptr) == FT_OK);
  CStr cid;
  REQUIRE(ft_deploy(ctx, &cid.p) == FT_OK);
  std::string cred_path = home + "/tiny.cred";
  REQUIRE(ft_issue(ctx, (home + "/user-tiny.json").c_str(), "toy msg",
                   cred_path.c_str()) == FT_OK);
  int ok = 0;
  REQUIRE(ft_verify(ctx, cred_path.c_str(), &ok) == FT_OK);
  CHECK(ok == 1);

  auto session_hex = first_session_id(home);
  CHECK(session_hex.size() == 2);  // single-byte residues
  CStr traced;
  REQUIRE(ft_trace_credential(ctx, "verifier", session_hex.c_str(),
                              &traced.p) == FT_OK);
  CHECK(json::parse(traced.str())["meter_delta"] == 1);
}

TEST_CASE("bench through the C interface") {
  Ctx ctx(temp_home("bench"), "ec");
  CStr out;
  REQUIRE(ft_bench(ctx, 2, 1, &out.p) == FT_OK);
  auto doc = json::parse(out.str());
  CHECK(doc["runs"] == 2);
  REQUIRE(doc["rows"].size() == 5);
  CHECK(doc["rows"][3]["meter_units"] == 1);
  CHECK(doc["rows"][3]["payload_bytes"].get<std::uint64_t>() <= 264);

  CStr text;
  REQUIRE(ft_bench(ctx, 2, 0, &text.p) == FT_OK);
  CHECK(text.str().find("identity-tracing") != std::string::npos);
}

TEST_CASE("demo transcript") {
  Ctx ctx(temp_home("demo"), nullptr);
  CStr out;
  REQUIRE(ft_demo(ctx, &out.p) == FT_OK);
  auto transcript = out.str();
  CHECK(transcript.find("issued credential to alice") != std::string::npos);
  CHECK(transcript.find("issuance stayed off-chain") != std::string::npos);
  CHECK(transcript.find("resolved the tag back to \"alice\"") !=
        std::string::npos);
  CHECK(transcript.find("anomaly rule a") != std::string::npos);
  CHECK(transcript.find("chain verification: ok") != std::string::npos);
}

}  // namespace
