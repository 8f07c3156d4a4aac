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

#include "fairtrace/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>

#include "fairtrace/errors.hpp"

namespace fairtrace::transport {

Bytes encode_message(const Message& m) {
  nlohmann::json j;
  j["type"] = m.type;
  j["session"] = m.session;
  j["payload"] = m.payload;
  std::string text = j.dump();
  return Bytes(text.begin(), text.end());
}

Message decode_message(BytesView frame) {
  nlohmann::json j = nlohmann::json::parse(
      frame.begin(), frame.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || !j.contains("type") ||
      !j.contains("session") || !j.contains("payload") ||
      !j["type"].is_string() || !j["session"].is_string() ||
      !j["payload"].is_object()) {
    fail("malformed-message", "frame is not a valid protocol message");
  }
  Message m;
  m.type = j["type"].get<std::string>();
  m.session = j["session"].get<std::string>();
  m.payload = j["payload"];
  return m;
}

void WireCapture::add(BytesView frame) {
  std::lock_guard lk(mu_);
  data_.insert(data_.end(), frame.begin(), frame.end());
  count_ += 1;
}

Bytes WireCapture::bytes() const {
  std::lock_guard lk(mu_);
  return data_;
}

std::size_t WireCapture::frame_count() const {
  std::lock_guard lk(mu_);
  return count_;
}

bool WireCapture::contains(BytesView needle) const {
  std::lock_guard lk(mu_);
  if (needle.empty()) return true;
  return std::search(data_.begin(), data_.end(), needle.begin(),
                     needle.end()) != data_.end();
}

void Conn::send(const Message& m) {
  Bytes body = encode_message(m);
  if (body.size() > kMaxFrameSize) {
    fail("malformed-message", "frame exceeds the size limit");
  }
  Bytes frame;
  put_u32_be(frame, static_cast<std::uint32_t>(body.size()));
  frame.insert(frame.end(), body.begin(), body.end());
  std::lock_guard lk(send_mu_);
  if (capture_) capture_->add(frame);
  send_frame(frame);
}

std::optional<Message> Conn::recv(int timeout_ms) {
  auto frame = recv_frame(timeout_ms);
  if (!frame) return std::nullopt;
  return decode_message(*frame);
}

Message Conn::request(const Message& m, int timeout_ms) {
  send(m);
  auto reply = recv(timeout_ms);
  if (!reply) fail("transport-error", "peer closed during " + m.type);
  return *reply;
}

void Conn::set_capture(std::shared_ptr<WireCapture> capture) {
  capture_ = std::move(capture);
}

namespace {

// Shared queue state of an in-process pair. Frames flow a-to-b and b-to-a;
// close is symmetric.
struct BusState {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> dir[2];
  bool closed = false;
};

class BusConn : public Conn {
 public:
  BusConn(std::shared_ptr<BusState> state, int side)
      : state_(std::move(state)), side_(side) {}
  ~BusConn() override { BusConn::close(); }

  void close() override {
    std::lock_guard lk(state_->mu);
    state_->closed = true;
    state_->cv.notify_all();
  }

 protected:
  void send_frame(BytesView frame) override {
    std::lock_guard lk(state_->mu);
    if (state_->closed) fail("transport-error", "bus connection is closed");
    state_->dir[side_].emplace_back(frame.begin(), frame.end());
    state_->cv.notify_all();
  }

  std::optional<Bytes> recv_frame(int timeout_ms) override {
    std::unique_lock lk(state_->mu);
    auto& queue = state_->dir[1 - side_];
    auto ready = [&] { return !queue.empty() || state_->closed; };
    if (timeout_ms < 0) {
      state_->cv.wait(lk, ready);
    } else if (!state_->cv.wait_for(lk, std::chrono::milliseconds(timeout_ms),
                                    ready)) {
      fail("transport-timeout", "no message within the deadline");
    }
    if (queue.empty()) return std::nullopt;
    Bytes frame = std::move(queue.front());
    queue.pop_front();
    // Strip the length prefix; the bus stores whole frames.
    return Bytes(frame.begin() + 4, frame.end());
  }

 private:
  std::shared_ptr<BusState> state_;
  int side_;
};

void wait_readable(int fd, int timeout_ms) {
  pollfd p{fd, POLLIN, 0};
  for (;;) {
    int rc = ::poll(&p, 1, timeout_ms);
    if (rc > 0) return;
    if (rc == 0) fail("transport-timeout", "no message within the deadline");
    if (errno != EINTR) fail("transport-error", "poll failed");
  }
}

class TcpConn : public Conn {
 public:
  explicit TcpConn(int fd) : fd_(fd) {}
  ~TcpConn() override {
    TcpConn::close();
    ::close(fd_);
  }

  void close() override { ::shutdown(fd_, SHUT_RDWR); }

 protected:
  void send_frame(BytesView frame) override {
    std::size_t off = 0;
    while (off < frame.size()) {
      ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off,
                         MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail("transport-error", "socket send failed");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<Bytes> recv_frame(int timeout_ms) override {
    Bytes header;
    if (!read_exact(header, 4, timeout_ms, /*eof_ok=*/true)) {
      return std::nullopt;
    }
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = len << 8 | header[i];
    if (len > kMaxFrameSize) {
      fail("malformed-message", "frame exceeds the size limit");
    }
    Bytes body;
    if (!read_exact(body, len, timeout_ms, /*eof_ok=*/false)) {
      fail("transport-error", "peer closed mid-frame");
    }
    return body;
  }

 private:
  // Reads exactly n bytes into out. EOF before the first byte returns false
  // when eof_ok; any later EOF also returns false.
  bool read_exact(Bytes& out, std::size_t n, int timeout_ms, bool eof_ok) {
    out.resize(n);
    std::size_t off = 0;
    while (off < n) {
      wait_readable(fd_, timeout_ms);
      ssize_t got = ::recv(fd_, out.data() + off, n - off, 0);
      if (got < 0) {
        if (errno == EINTR) continue;
        fail("transport-error", "socket recv failed");
      }
      if (got == 0) {
        if (off == 0 && eof_ok) return false;
        return false;
      }
      off += static_cast<std::size_t>(got);
    }
    return true;
  }

  int fd_;
};

int checked_socket() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) fail("transport-error", "cannot create socket");
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

}  // namespace

std::pair<ConnPtr, ConnPtr> make_bus_pair() {
  auto state = std::make_shared<BusState>();
  return {std::make_unique<BusConn>(state, 0),
          std::make_unique<BusConn>(state, 1)};
}

TcpListener::TcpListener(std::uint16_t port) {
  fd_ = checked_socket();
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 16) != 0) {
    ::close(fd_);
    fd_ = -1;
    fail("transport-error", "cannot bind listener");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

ConnPtr TcpListener::accept(int timeout_ms) {
  if (fd_ < 0) fail("transport-error", "listener is closed");
  wait_readable(fd_, timeout_ms);
  int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) fail("transport-error", "accept failed");
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<TcpConn>(fd);
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

ConnPtr tcp_connect(const std::string& host, std::uint16_t port,
                    int timeout_ms) {
  (void)timeout_ms;
  int fd = checked_socket();
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    fail("transport-error", "bad host address");
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    fail("transport-error", "cannot connect to " + host);
  }
  return std::make_unique<TcpConn>(fd);
}

}  // namespace fairtrace::transport
