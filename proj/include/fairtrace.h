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

#ifndef FAIRTRACE_H_
#define FAIRTRACE_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

// C interface to the credential tracing system. A context is bound to a home
// directory holding the operator's key files, the contract descriptor, the
// platform state and the chain file. All functions return FT_OK or an error
// class; ft_last_error gives the failing module's error code and detail.
// Strings returned through char** outs are owned by the caller and released
// with ft_string_free.

typedef struct ft_ctx ft_ctx;

enum {
  FT_OK = 0,
  FT_ERR_USAGE = 1,     // bad call arguments
  FT_ERR_IO = 2,        // file access or malformed persisted data
  FT_ERR_STATE = 3,     // missing setup, key or deployment prerequisite
  FT_ERR_LEDGER = 4,    // chain validation or confirmation failure
  FT_ERR_PROTOCOL = 5,  // crypto, transport or contract protocol failure
  FT_ERR_INTERNAL = 6
};

// backend is "ec", "toy", or NULL to use the home's configured backend
// (defaulting to "ec" before setup). Returns NULL only on allocation
// failure.
ft_ctx* ft_ctx_new(const char* home_dir, const char* backend);
void ft_ctx_free(ft_ctx* ctx);

// Message for the most recent failing call on this context; empty string
// after a success. Valid until the next call on the same context.
const char* ft_last_error(const ft_ctx* ctx);

// Initializes the home directory: configuration, platform state and an
// empty chain. Fails if the home is already set up.
int ft_setup(ft_ctx* ctx);

// Key generation. A NULL out_path picks the home's default location.
int ft_keygen_issuer(ft_ctx* ctx, const char* out_path);
int ft_keygen_user(ft_ctx* ctx, const char* label, const char* out_path);

// Deploys the tracing contract and registers the tracing parameter; the
// contract id is returned as a hex string.
int ft_deploy(ft_ctx* ctx, char** contract_id_out);

// Runs the blind issuing protocol for the user key file and writes the
// credential file. Touches no chain state.
int ft_issue(ft_ctx* ctx, const char* user_key_path, const char* message,
             const char* credential_out_path);

// Checks a credential file; *ok_out is 1 when it verifies.
int ft_verify(ft_ctx* ctx, const char* credential_path, int* ok_out);

// Trace operations submit one confirmed transaction each and return a JSON
// summary. caller is an accountability label recorded on the transaction
// (NULL for "issuer"). Hex inputs are group-element encodings.
int ft_trace_credential(ft_ctx* ctx, const char* caller,
                        const char* session_id_hex, char** json_out);
int ft_trace_identity(ft_ctx* ctx, const char* caller,
                      const char* zeta1_hex, char** json_out);
// op is "cred" or "id"; operands_hex is an array of count hex strings.
int ft_trace_batch(ft_ctx* ctx, const char* caller, const char* op,
                   const char* const* operands_hex, size_t count,
                   char** json_out);

// Audit report over confirmed trace transactions in [from_height,
// to_height]; pass UINT64_MAX to extend to the tip. contract_id NULL means
// the deployed contract.
int ft_inspect(ft_ctx* ctx, const char* contract_id, uint64_t from_height,
               uint64_t to_height, char** report_json_out);

// Structural chain verification; reports {ok, first_bad_height}.
int ft_ledger_verify(ft_ctx* ctx, char** json_out);

// Benchmark of the five core operations, runs repetitions each (0 for the
// default 300). Output is a table, or JSON when as_json is nonzero.
int ft_bench(ft_ctx* ctx, size_t runs, int as_json, char** out);

// Self-contained end-to-end scenario over TCP loopback actors; returns the
// transcript. Uses a throwaway chain, not the home's.
int ft_demo(ft_ctx* ctx, char** transcript_out);

void ft_string_free(char* s);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // FAIRTRACE_H_
