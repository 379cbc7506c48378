#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gazeload/stream.hpp"

namespace gazeload {

// Line-delimited JSON protocol.
//   in:  {"t":<us>, "lx":..,"ly":..,"lz":.., "rx":..,"ry":..,"rz":..,
//         "lp":<mm>, "rp":<mm>, "lv":0|1, "rv":0|1}
//   out: {"t_end":<us>, "p_high":<prob>, "label":0|1, "latency_us":<us>}
// A line that cannot be parsed or applied yields {"error":"..."} on the same
// stream and processing continues; blank lines are ignored.

// Applies one input line to a session. Returns the response record to write
// (prediction or error), or nothing for blank lines and non-emitting samples.
std::optional<std::string> handle_stream_line(StreamSession& session, const std::string& line);

// Pipe mode and the per-connection loop: reads records from `in` until EOF,
// writes responses to `out`, one fresh session per call. An immediately
// closed stream produces no output.
void run_connection(std::istream& in, std::ostream& out,
                    std::shared_ptr<const Predictor> model, const StreamConfig& cfg);

// Minimal TCP front end: one thread and one independent StreamSession per
// client; the model is shared read-only. Construction binds and starts
// accepting; stop() (or destruction) shuts the listener and joins.
class ServeHandle {
 public:
  ServeHandle(const std::string& host, uint16_t port, std::shared_ptr<const Predictor> model,
              StreamConfig cfg);
  ~ServeHandle();
  ServeHandle(const ServeHandle&) = delete;
  ServeHandle& operator=(const ServeHandle&) = delete;

  // Bound port; useful when constructed with port 0.
  uint16_t port() const { return port_; }
  void stop();

 private:
  void accept_loop();

  std::shared_ptr<const Predictor> model_;
  StreamConfig cfg_;
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<int> client_fds_;
  std::vector<std::thread> clients_;
};

// CLI entry: "stdio" runs one session over standard input/output;
// "host:port" serves TCP until the process is terminated.
int serve_forever(const std::string& address, const std::string& model_path,
                  const StreamConfig& cfg);

}  // namespace gazeload
