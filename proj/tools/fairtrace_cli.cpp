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

// Command-line front end. Every operation goes through the C interface;
// this file only parses arguments and formats output.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairtrace.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct CStr {
  char* p = nullptr;
  ~CStr() { ft_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

std::string default_home() {
  if (const char* env = std::getenv("FAIRTRACE_HOME")) return env;
  if (const char* home = std::getenv("HOME")) {
    return std::string(home) + "/.fairtrace";
  }
  return ".fairtrace";
}

// Returns exit code 0/1; prints the module error on failure.
int finish(ft_ctx* ctx, int rc) {
  if (rc != FT_OK) {
    std::fprintf(stderr, "error: %s\n", ft_last_error(ctx));
    return 1;
  }
  return 0;
}

void print_receipt(const json& doc) {
  std::printf("txid %s\nconfirmed at height %llu, depth %llu\n",
              doc["txid"].get<std::string>().c_str(),
              static_cast<unsigned long long>(
                  doc["height"].get<std::uint64_t>()),
              static_cast<unsigned long long>(
                  doc["depth"].get<std::uint64_t>()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"credential tracing system"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string home = default_home();
  std::string backend;
  app.add_option("--home", home, "state directory")
      ->capture_default_str();
  app.add_option("--backend", backend, "group backend: ec or toy")
      ->envname("REVOC_BACKEND")
      ->check(CLI::IsMember({"ec", "toy"}));

  std::function<int(ft_ctx*)> run;

  auto* setup = app.add_subcommand("setup", "initialize the home directory");
  setup->callback([&] {
    run = [&](ft_ctx* ctx) {
      int rc = finish(ctx, ft_setup(ctx));
      if (rc == 0) std::printf("initialized %s\n", home.c_str());
      return rc;
    };
  });

  auto* keygen = app.add_subcommand("keygen", "generate a key file");
  std::string role, label, out_path;
  keygen->add_option("--role", role, "issuer or user")
      ->required()
      ->check(CLI::IsMember({"issuer", "user"}));
  keygen->add_option("--label", label, "identity label (user role)");
  keygen->add_option("--out", out_path, "output file");
  keygen->callback([&] {
    run = [&](ft_ctx* ctx) {
      const char* out = out_path.empty() ? nullptr : out_path.c_str();
      int rc;
      std::string shown = out_path;
      if (role == "issuer") {
        rc = ft_keygen_issuer(ctx, out);
        if (shown.empty()) shown = home + "/issuer.json";
      } else {
        rc = ft_keygen_user(ctx, label.c_str(), out);
        if (shown.empty()) shown = home + "/user-" + label + ".json";
      }
      rc = finish(ctx, rc);
      if (rc == 0) std::printf("wrote %s\n", shown.c_str());
      return rc;
    };
  });

  auto* deploy =
      app.add_subcommand("deploy", "deploy and register the contract");
  bool deploy_json = false;
  deploy->add_flag("--json", deploy_json, "machine-readable output");
  deploy->callback([&] {
    run = [&](ft_ctx* ctx) {
      CStr cid;
      int rc = finish(ctx, ft_deploy(ctx, &cid.p));
      if (rc != 0) return rc;
      if (deploy_json) {
        json doc;
        doc["contract_id"] = cid.str();
        std::printf("%s\n", doc.dump(2).c_str());
      } else {
        std::printf("contract %s deployed and registered\n",
                    cid.str().c_str());
      }
      return 0;
    };
  });

  auto* issue = app.add_subcommand("issue", "run the issuing protocol");
  std::string user_path, message, cred_out;
  issue->add_option("--user", user_path, "user key file")->required();
  issue->add_option("--message,-m", message, "message to sign");
  issue->add_option("--out", cred_out, "credential output file")->required();
  issue->callback([&] {
    run = [&](ft_ctx* ctx) {
      int rc = finish(ctx, ft_issue(ctx, user_path.c_str(), message.c_str(),
                                    cred_out.c_str()));
      if (rc == 0) std::printf("credential written to %s\n",
                               cred_out.c_str());
      return rc;
    };
  });

  auto* verify = app.add_subcommand("verify", "check a credential file");
  std::string cred_path;
  bool verify_json = false;
  verify->add_option("--cred", cred_path, "credential file")->required();
  verify->add_flag("--json", verify_json, "machine-readable output");
  verify->callback([&] {
    run = [&](ft_ctx* ctx) {
      int ok = 0;
      int rc = finish(ctx, ft_verify(ctx, cred_path.c_str(), &ok));
      if (rc != 0) return rc;
      if (verify_json) {
        json doc;
        doc["ok"] = (ok == 1);
        std::printf("%s\n", doc.dump(2).c_str());
      } else if (ok == 1) {
        std::printf("credential verifies\n");
      } else {
        std::fprintf(stderr,
                     "error: verification-failed: credential does not "
                     "verify\n");
      }
      return ok == 1 ? 0 : 1;
    };
  });

  auto* trace = app.add_subcommand("trace", "anonymity revocation");
  trace->require_subcommand(1);
  std::string caller = "issuer";
  trace->add_option("--caller", caller,
                    "accountability label recorded on the transaction")
      ->capture_default_str();

  auto* tcred = trace->add_subcommand("cred",
                                      "session id to credential tag");
  std::string session_hex;
  bool tcred_json = false;
  tcred->add_option("--session-id", session_hex, "hex group element")
      ->required();
  tcred->add_flag("--json", tcred_json, "machine-readable output");
  tcred->callback([&] {
    run = [&](ft_ctx* ctx) {
      CStr out;
      int rc = finish(ctx, ft_trace_credential(ctx, caller.c_str(),
                                               session_hex.c_str(), &out.p));
      if (rc != 0) return rc;
      if (tcred_json) {
        std::printf("%s", out.str().c_str());
      } else {
        auto doc = json::parse(out.str());
        std::printf("zeta1 %s\nmeter %llu\n",
                    doc["zeta1"].get<std::string>().c_str(),
                    static_cast<unsigned long long>(
                        doc["meter_delta"].get<std::uint64_t>()));
        print_receipt(doc);
      }
      return 0;
    };
  });

  auto* tid = trace->add_subcommand("id", "credential tag to identity");
  std::string zeta1_hex;
  bool tid_json = false;
  tid->add_option("--zeta1", zeta1_hex, "hex group element")->required();
  tid->add_flag("--json", tid_json, "machine-readable output");
  tid->callback([&] {
    run = [&](ft_ctx* ctx) {
      CStr out;
      int rc = finish(ctx, ft_trace_identity(ctx, caller.c_str(),
                                             zeta1_hex.c_str(), &out.p));
      if (rc != 0) return rc;
      if (tid_json) {
        std::printf("%s", out.str().c_str());
      } else {
        auto doc = json::parse(out.str());
        std::printf("session %s\nidentity \"%s\"\n",
                    doc["session_id"].get<std::string>().c_str(),
                    doc["label"].get<std::string>().c_str());
        print_receipt(doc);
      }
      return 0;
    };
  });

  auto* tbatch = trace->add_subcommand("batch",
                                       "many operands, one transaction");
  std::string batch_op;
  std::vector<std::string> operands;
  bool tbatch_json = false;
  tbatch->add_option("--op", batch_op, "cred or id")
      ->required()
      ->check(CLI::IsMember({"cred", "id"}));
  tbatch->add_option("--operand", operands, "hex group element (repeat)")
      ->required();
  tbatch->add_flag("--json", tbatch_json, "machine-readable output");
  tbatch->callback([&] {
    run = [&](ft_ctx* ctx) {
      std::vector<const char*> ptrs;
      ptrs.reserve(operands.size());
      for (const auto& operand : operands) ptrs.push_back(operand.c_str());
      CStr out;
      int rc = finish(ctx, ft_trace_batch(ctx, caller.c_str(),
                                          batch_op.c_str(), ptrs.data(),
                                          ptrs.size(), &out.p));
      if (rc != 0) return rc;
      if (tbatch_json) {
        std::printf("%s", out.str().c_str());
      } else {
        auto doc = json::parse(out.str());
        for (const auto& row : doc["entries"]) {
          std::printf("%s -> %s", row["operand"].get<std::string>().c_str(),
                      row["result"].get<std::string>().c_str());
          if (row.contains("label")) {
            std::printf("  \"%s\"", row["label"].get<std::string>().c_str());
          }
          std::printf("\n");
        }
        print_receipt(doc);
      }
      return 0;
    };
  });

  auto* inspect = app.add_subcommand("inspect", "audit trace activity");
  std::string inspect_cid;
  std::uint64_t from_height = 0;
  std::uint64_t to_height = UINT64_MAX;
  bool inspect_json = false;
  inspect->add_option("--contract", inspect_cid,
                      "contract id (default: the deployed one)");
  inspect->add_option("--from", from_height, "window start height")
      ->capture_default_str();
  inspect->add_option("--to", to_height, "window end height")
      ->default_str("tip");
  inspect->add_flag("--json", inspect_json, "full report JSON");
  inspect->callback([&] {
    run = [&](ft_ctx* ctx) {
      CStr out;
      const char* cid = inspect_cid.empty() ? nullptr : inspect_cid.c_str();
      int rc = finish(ctx, ft_inspect(ctx, cid, from_height, to_height,
                                      &out.p));
      if (rc != 0) return rc;
      if (inspect_json) {
        std::printf("%s", out.str().c_str());
        return 0;
      }
      auto doc = json::parse(out.str());
      std::printf("contract %s, heights %llu..%llu\n",
                  doc["contract_id"].get<std::string>().c_str(),
                  static_cast<unsigned long long>(
                      doc["window"]["from"].get<std::uint64_t>()),
                  static_cast<unsigned long long>(
                      doc["window"]["to"].get<std::uint64_t>()));
      std::printf("%zu trace transactions\n", doc["entries"].size());
      for (const auto& [kind, count] :
           doc["summary"]["by_kind"].items()) {
        std::printf("  %s: %llu\n", kind.c_str(),
                    static_cast<unsigned long long>(
                        count.get<std::uint64_t>()));
      }
      std::printf("%zu anomalies\n", doc["anomalies"].size());
      for (const auto& anomaly : doc["anomalies"]) {
        std::printf("  rule %s: %s\n",
                    anomaly["rule"].get<std::string>().c_str(),
                    anomaly["detail"].get<std::string>().c_str());
      }
      std::printf("chain %s\n",
                  doc["chain"]["ok"].get<bool>() ? "ok" : "BROKEN");
      return 0;
    };
  });

  auto* ledger = app.add_subcommand("ledger", "chain maintenance");
  ledger->require_subcommand(1);
  auto* lverify = ledger->add_subcommand("verify", "check chain integrity");
  bool lverify_json = false;
  lverify->add_flag("--json", lverify_json, "machine-readable output");
  lverify->callback([&] {
    run = [&](ft_ctx* ctx) {
      CStr out;
      int rc = finish(ctx, ft_ledger_verify(ctx, &out.p));
      if (rc != 0) return rc;
      auto doc = json::parse(out.str());
      bool ok = doc["ok"].get<bool>();
      if (lverify_json) {
        std::printf("%s", out.str().c_str());
      } else if (ok) {
        std::printf("chain ok\n");
      } else {
        std::fprintf(stderr, "error: corrupt-ledger: first bad height %llu\n",
                     static_cast<unsigned long long>(
                         doc["first_bad_height"].get<std::uint64_t>()));
      }
      return ok ? 0 : 1;
    };
  });

  auto* bench = app.add_subcommand("bench", "benchmark the five operations");
  std::size_t runs = 300;
  bool bench_json = false;
  bench->add_option("--runs", runs, "repetitions per operation")
      ->capture_default_str();
  bench->add_flag("--json", bench_json, "machine-readable output");
  bench->callback([&] {
    run = [&](ft_ctx* ctx) {
      CStr out;
      int rc = finish(ctx, ft_bench(ctx, runs, bench_json ? 1 : 0, &out.p));
      if (rc == 0) std::printf("%s", out.str().c_str());
      return rc;
    };
  });

  auto* demo = app.add_subcommand("demo",
                                  "end-to-end scenario over TCP loopback");
  demo->callback([&] {
    run = [&](ft_ctx* ctx) {
      CStr out;
      int rc = finish(ctx, ft_demo(ctx, &out.p));
      if (rc == 0) std::printf("%s", out.str().c_str());
      return rc;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::unique_ptr<ft_ctx, void (*)(ft_ctx*)> ctx(
      ft_ctx_new(home.c_str(), backend.empty() ? nullptr : backend.c_str()),
      ft_ctx_free);
  if (!ctx) {
    std::fprintf(stderr, "error: out of memory\n");
    return 1;
  }
  return run(ctx.get());
}
