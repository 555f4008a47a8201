#include "aos/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "aos/byte_io.hpp"

namespace aos {

namespace {

Bytes error_frame(std::uint64_t request_id, ErrorCode code, const std::string& message) {
  Bytes out;
  Bytes body = wire::encode_error(code, message);
  wire::encode_frame_into(static_cast<std::uint8_t>(wire::MsgType::kError), request_id, body, out);
  return out;
}

[[noreturn]] void sys_fail(const char* what) {
  throw Error(ErrorCode::kConnection, std::string(what) + ": " + std::strerror(errno));
}

bool read_exact(int fd, std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t k = ::recv(fd, p, n, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    p += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

bool write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t k = ::send(fd, p, n, MSG_NOSIGNAL);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    p += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

// Reads one length-prefixed frame. Returns false on EOF; sets `bad_length`
// when the length field is unusable (stream cannot be resynchronized).
bool read_frame(int fd, std::uint32_t max_frame, Bytes& frame, bool& bad_length) {
  bad_length = false;
  std::uint8_t len_bytes[4];
  if (!read_exact(fd, len_bytes, 4)) return false;
  std::uint32_t length;
  std::memcpy(&length, len_bytes, 4);
  if (length < 9 || length > max_frame) {
    bad_length = true;
    return true;
  }
  frame.resize(4 + static_cast<std::size_t>(length));
  std::memcpy(frame.data(), len_bytes, 4);
  return read_exact(fd, frame.data() + 4, length);
}

class LoopbackConnection final : public Connection {
 public:
  explicit LoopbackConnection(Server& server) : server_(server) {}
  Bytes round_trip(ByteView request_frame) override { return server_.handle(request_frame); }

 private:
  Server& server_;
};

class TcpConnection final : public Connection {
 public:
  TcpConnection(int fd, std::uint32_t max_frame) : fd_(fd), max_frame_(max_frame) {}
  ~TcpConnection() override { ::close(fd_); }

  Bytes round_trip(ByteView request_frame) override {
    if (!write_all(fd_, request_frame.data(), request_frame.size())) sys_fail("send");
    Bytes reply;
    bool bad_length = false;
    if (!read_frame(fd_, max_frame_, reply, bad_length)) {
      throw Error(ErrorCode::kConnection, "connection closed by server");
    }
    if (bad_length) throw Error(ErrorCode::kMalformed, "reply frame has invalid length");
    return reply;
  }

 private:
  int fd_;
  std::uint32_t max_frame_;
};

}  // namespace

Server::Server(Engine& engine, ServerOptions options) : engine_(engine), options_(options) {}

Server::~Server() { stop(); }

Bytes Server::handle(ByteView frame) {
  counters_.add_received(frame.size());
  std::uint64_t request_id = 0;
  Bytes reply;
  try {
    ByteReader r(frame);
    std::uint32_t length = r.u32();
    if (length < 9 || length > options_.max_frame || length != frame.size() - 4) {
      throw DecodeError("bad frame length", 0);
    }
    std::uint8_t type = r.u8();
    request_id = r.u64();
    counters_.count(type);
    if (!wire::is_request_type(type)) {
      throw DecodeError("unknown msg_type " + std::to_string(type), 4);
    }
    reply = dispatch(type, request_id, r.rest());
  } catch (const Error& e) {
    reply = error_frame(request_id, e.code(), e.what());
  } catch (const std::exception& e) {
    reply = error_frame(request_id, ErrorCode::kInternal, e.what());
  }
  counters_.add_sent(reply.size());
  return reply;
}

Bytes Server::dispatch(std::uint8_t type, std::uint64_t request_id, ByteView body) {
  using wire::MsgType;
  auto msg = static_cast<MsgType>(type);
  Bytes reply_body;
  switch (msg) {
    case MsgType::kRegisterClass:
      engine_.register_class(wire::decode_class(body));
      break;
    case MsgType::kRegisterMethod:
      engine_.register_method(wire::decode_method(body));
      break;
    case MsgType::kMakePersistent: {
      auto req = wire::decode_make_persistent(body);
      reply_body = wire::encode_id(
          engine_.make_persistent_encoded(req.class_name, req.payload, req.tier));
      break;
    }
    case MsgType::kGet:
      reply_body = engine_.get_encoded(wire::decode_id(body));
      break;
    case MsgType::kInvoke: {
      auto req = wire::decode_invoke(body);
      reply_body = wire::encode_invoke_result(
          engine_.invoke(req.id, req.method_name, req.args, req.placement));
      break;
    }
    case MsgType::kDelete:
      engine_.delete_object(wire::decode_id(body));
      break;
    case MsgType::kStats: {
      if (!body.empty()) throw DecodeError("STATS takes no body", wire::kFrameHeaderBytes);
      wire::StatsSnapshot s{counters_.snapshot(), engine_.tier_counters()};
      reply_body = wire::encode_stats(s);
      break;
    }
    case MsgType::kFlush:
      if (!body.empty()) throw DecodeError("FLUSH takes no body", wire::kFrameHeaderBytes);
      engine_.flush();
      break;
    case MsgType::kError:
      throw DecodeError("ERROR is not a request", 4);
  }
  Bytes out;
  wire::encode_frame_into(wire::reply_type(msg), request_id, reply_body, out, options_.max_frame);
  return out;
}

std::unique_ptr<Connection> Server::connect_loopback() {
  return std::make_unique<LoopbackConnection>(*this);
}

std::uint16_t Server::listen_tcp(const std::string& host, std::uint16_t port) {
  if (listen_fd_ >= 0) throw Error(ErrorCode::kInvalidArgument, "server already listening");
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) sys_fail("socket");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw Error(ErrorCode::kInvalidArgument, "bad listen address " + host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(fd, 64) != 0) {
    int err = errno;
    ::close(fd);
    errno = err;
    sys_fail("bind/listen");
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  listen_fd_ = fd;
  stopping_ = false;
  acceptor_ = std::thread([this] { accept_loop(); });
  return ntohs(addr.sin_port);
}

void Server::accept_loop() {
  while (!stopping_) {
    int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listener closed
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(conn_mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    conn_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void Server::serve_connection(int fd) {
  Bytes frame;
  for (;;) {
    bool bad_length = false;
    if (!read_frame(fd, options_.max_frame, frame, bad_length)) break;
    if (bad_length) {
      counters_.add_received(4);
      Bytes reply = error_frame(0, ErrorCode::kMalformed, "invalid frame length");
      counters_.add_sent(reply.size());
      write_all(fd, reply.data(), reply.size());
      break;
    }
    Bytes reply = handle(frame);
    if (!write_all(fd, reply.data(), reply.size())) break;
  }
  ::shutdown(fd, SHUT_RDWR);
}

void Server::stop() {
  if (listen_fd_ < 0) return;
  stopping_ = true;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(conn_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  {
    std::lock_guard lock(conn_mu_);
    for (int fd : conn_fds_) ::close(fd);
    conn_fds_.clear();
  }
  listen_fd_ = -1;
}

std::unique_ptr<Connection> connect_tcp(const std::string& host, std::uint16_t port,
                                        std::uint32_t max_frame) {
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) sys_fail("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw Error(ErrorCode::kInvalidArgument, "bad address " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int err = errno;
    ::close(fd);
    errno = err;
    sys_fail("connect");
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<TcpConnection>(fd, max_frame);
}

}  // namespace aos
