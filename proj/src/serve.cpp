#include "gazeload/serve.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <utility>

#include <json.hpp>

#include "gazeload/error.hpp"
#include "gazeload/log.hpp"

namespace gazeload {

namespace {

using nlohmann::ordered_json;

std::string error_record(const std::string& msg) {
  ordered_json o;
  o["error"] = msg;
  return o.dump();
}

bool get_num(const nlohmann::json& j, const char* key, double& out) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return false;
  out = it->get<double>();
  return true;
}

bool get_flag(const nlohmann::json& j, const char* key, bool& out) {
  auto it = j.find(key);
  if (it == j.end()) return false;
  if (it->is_boolean()) {
    out = it->get<bool>();
    return true;
  }
  if (it->is_number()) {
    out = it->get<double>() != 0.0;
    return true;
  }
  return false;
}

}  // namespace

std::optional<std::string> handle_stream_line(StreamSession& session, const std::string& line) {
  if (line.find_first_not_of(" \t\r") == std::string::npos) return std::nullopt;

  nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return error_record("unparseable record");

  GazeSample s;
  double t = 0;
  bool ok = get_num(j, "t", t);
  ok = ok && get_num(j, "lx", s.left_dir.x) && get_num(j, "ly", s.left_dir.y) &&
       get_num(j, "lz", s.left_dir.z);
  ok = ok && get_num(j, "rx", s.right_dir.x) && get_num(j, "ry", s.right_dir.y) &&
       get_num(j, "rz", s.right_dir.z);
  ok = ok && get_num(j, "lp", s.left_pupil_mm) && get_num(j, "rp", s.right_pupil_mm);
  ok = ok && get_flag(j, "lv", s.left_valid) && get_flag(j, "rv", s.right_valid);
  if (!ok) return error_record("record missing required fields");
  s.timestamp_us = static_cast<int64_t>(std::llround(t));

  try {
    auto pred = session.push_sample(s);
    if (!pred) return std::nullopt;
    ordered_json o;
    o["t_end"] = pred->window_end_us;
    o["p_high"] = pred->p_high;
    o["label"] = pred->label;
    o["latency_us"] = pred->latency_us;
    return o.dump();
  } catch (const GazeError& e) {
    return error_record(e.what());
  }
}

void run_connection(std::istream& in, std::ostream& out,
                    std::shared_ptr<const Predictor> model, const StreamConfig& cfg) {
  StreamSession session(cfg, std::move(model));
  std::string line;
  while (std::getline(in, line)) {
    auto resp = handle_stream_line(session, line);
    if (resp) {
      out << *resp << '\n';
      out.flush();
    }
  }
}

namespace {

// recv/send line loop for one socket; mirrors run_connection.
void serve_socket(int fd, std::shared_ptr<const Predictor> model, const StreamConfig& cfg) {
  StreamSession session(cfg, std::move(model));
  std::string pending;
  char buf[4096];
  for (;;) {
    ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    pending.append(buf, static_cast<size_t>(n));
    size_t pos;
    while ((pos = pending.find('\n')) != std::string::npos) {
      std::string line = pending.substr(0, pos);
      pending.erase(0, pos + 1);
      auto resp = handle_stream_line(session, line);
      if (!resp) continue;
      std::string payload = *resp + "\n";
      size_t off = 0;
      while (off < payload.size()) {
        ssize_t w = ::send(fd, payload.data() + off, payload.size() - off, MSG_NOSIGNAL);
        if (w <= 0) return;
        off += static_cast<size_t>(w);
      }
    }
  }
}

}  // namespace

ServeHandle::ServeHandle(const std::string& host, uint16_t port,
                         std::shared_ptr<const Predictor> model, StreamConfig cfg)
    : model_(std::move(model)), cfg_(cfg) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw GazeError(ErrorCode::IoError, "socket: " + std::string(strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw GazeError(ErrorCode::InvalidConfig, "bad listen address: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    std::string msg = strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw GazeError(ErrorCode::IoError, "bind/listen " + host + ": " + msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);

  acceptor_ = std::thread([this] { accept_loop(); });
}

void ServeHandle::accept_loop() {
  for (;;) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_.load()) return;
      if (errno == EINTR) continue;
      return;  // listener shut down
    }
    std::lock_guard<std::mutex> lock(mu_);
    size_t idx = client_fds_.size();
    client_fds_.push_back(fd);
    clients_.emplace_back([this, idx, fd] {
      serve_socket(fd, model_, cfg_);
      {
        std::lock_guard<std::mutex> l(mu_);
        client_fds_[idx] = -1;
      }
      ::close(fd);
    });
  }
}

void ServeHandle::stop() {
  bool expected = false;
  if (!stopping_.compare_exchange_strong(expected, true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
  }
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (int fd : client_fds_)
      if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : clients_)
    if (t.joinable()) t.join();
  listen_fd_ = -1;
}

ServeHandle::~ServeHandle() { stop(); }

int serve_forever(const std::string& address, const std::string& model_path,
                  const StreamConfig& cfg) {
  auto model = std::make_shared<const Predictor>(Predictor::load(model_path));

  if (address == "stdio" || address == "-") {
    run_connection(std::cin, std::cout, model, cfg);
    return 0;
  }

  size_t colon = address.rfind(':');
  if (colon == std::string::npos)
    throw GazeError(ErrorCode::InvalidConfig, "address must be host:port or stdio");
  std::string host = address.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    port = -1;
  }
  if (host.empty()) host = "127.0.0.1";
  if (port < 0 || port > 65535)
    throw GazeError(ErrorCode::InvalidConfig, "bad port in address: " + address);

  ServeHandle handle(host, static_cast<uint16_t>(port), model, cfg);
  log::info("serving on %s:%u", host.c_str(), static_cast<unsigned>(handle.port()));
  // Runs until the process is terminated.
  for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
}

}  // namespace gazeload
