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

#ifndef FAIRTRACE_TRANSPORT_HPP_
#define FAIRTRACE_TRANSPORT_HPP_

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "fairtrace/bytes.hpp"

// Actor-to-actor messaging. Every message travels as a 4-byte big-endian
// length followed by a JSON object {type, session, payload}; binary payload
// fields are hex strings. The in-process bus and the TCP transport share the
// same encoding, so flows behave identically over either.

namespace fairtrace::transport {

inline constexpr std::size_t kMaxFrameSize = 1 << 24;
inline constexpr int kDefaultTimeoutMs = 10000;

struct Message {
  std::string type;
  std::string session;
  nlohmann::json payload = nlohmann::json::object();
};

Bytes encode_message(const Message& m);
Message decode_message(BytesView frame);

// Append-only record of every frame sent through the connections it is
// attached to, in send order. Used by eavesdropper-view tests.
class WireCapture {
 public:
  void add(BytesView frame);
  Bytes bytes() const;
  std::size_t frame_count() const;
  bool contains(BytesView needle) const;

 private:
  mutable std::mutex mu_;
  Bytes data_;
  std::size_t count_ = 0;
};

// One end of a duplex message pipe. recv with a negative timeout blocks
// until a message arrives or the peer closes; a finite timeout raises
// transport-timeout when it expires.
class Conn {
 public:
  virtual ~Conn() = default;

  void send(const Message& m);
  std::optional<Message> recv(int timeout_ms = -1);
  // send + recv with the client-side default timeout.
  Message request(const Message& m, int timeout_ms = kDefaultTimeoutMs);

  virtual void close() = 0;
  void set_capture(std::shared_ptr<WireCapture> capture);

 protected:
  virtual void send_frame(BytesView frame) = 0;
  virtual std::optional<Bytes> recv_frame(int timeout_ms) = 0;

 private:
  std::shared_ptr<WireCapture> capture_;
  std::mutex send_mu_;
};

using ConnPtr = std::unique_ptr<Conn>;

// Connected pair of in-process endpoints.
std::pair<ConnPtr, ConnPtr> make_bus_pair();

class TcpListener {
 public:
  // Binds 127.0.0.1; port 0 picks an ephemeral port.
  explicit TcpListener(std::uint16_t port = 0);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  ConnPtr accept(int timeout_ms = kDefaultTimeoutMs);
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

ConnPtr tcp_connect(const std::string& host, std::uint16_t port,
                    int timeout_ms = kDefaultTimeoutMs);

}  // namespace fairtrace::transport

#endif  // FAIRTRACE_TRANSPORT_HPP_
