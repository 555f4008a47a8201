#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "aos/engine.hpp"
#include "aos/wire.hpp"

namespace aos {

/// A request/reply byte channel to a server. One outstanding request at a
/// time; replies come back in request order.
class Connection {
 public:
  virtual ~Connection() = default;
  /// Sends one encoded request frame and returns the encoded reply frame.
  virtual Bytes round_trip(ByteView request_frame) = 0;
};

struct ServerOptions {
  std::uint32_t max_frame = wire::kDefaultMaxFrame;
};

/// Frame dispatcher over an Engine plus the transports that feed it.
class Server {
 public:
  explicit Server(Engine& engine, ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Handles one complete request frame and returns exactly one reply frame.
  /// Never throws for malformed input; errors become ERROR replies.
  Bytes handle(ByteView frame);

  wire::WireCounters counters() const { return counters_.snapshot(); }
  Engine& engine() { return engine_; }

  /// In-process transport: frames are handed to handle() directly.
  std::unique_ptr<Connection> connect_loopback();

  /// Starts accepting TCP connections on host:port (0 = ephemeral) and
  /// returns the bound port.
  std::uint16_t listen_tcp(const std::string& host = "127.0.0.1", std::uint16_t port = 0);
  void stop();

 private:
  Bytes dispatch(std::uint8_t type, std::uint64_t request_id, ByteView body);
  void accept_loop();
  void serve_connection(int fd);

  Engine& engine_;
  ServerOptions options_;
  wire::AtomicWireCounters counters_;

  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex conn_mu_;
  std::vector<std::thread> workers_;
  std::vector<int> conn_fds_;
};

/// Client side of the TCP transport.
std::unique_ptr<Connection> connect_tcp(const std::string& host, std::uint16_t port,
                                        std::uint32_t max_frame = wire::kDefaultMaxFrame);

}  // namespace aos
