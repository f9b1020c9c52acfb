#include "linktheft/oracle.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <vector>

#include <nlohmann/json.hpp>

#include "linktheft/errors.hpp"
#include "linktheft/models.hpp"

namespace linktheft {

namespace {

using nlohmann::json;

std::string handle_request(LocalOracle& oracle, const std::string& line) {
  json req = json::parse(line, nullptr, false);
  if (req.is_discarded() || !req.is_object())
    return R"({"ok":false,"error":"parse"})";
  const std::string op = req.value("op", "");
  if (op == "meta") {
    return json{{"ok", true},
                {"num_classes", oracle.num_classes()},
                {"node_count", oracle.node_count()}}
        .dump();
  }
  if (op == "query") {
    if (!req.contains("node") || !req["node"].is_number_integer())
      return R"({"ok":false,"error":"parse"})";
    try {
      auto p = oracle.query(req["node"].get<int>());
      return json{{"ok", true}, {"posteriors", p}}.dump();
    } catch (const OracleError&) {
      return R"({"ok":false,"error":"node"})";
    }
  }
  return R"({"ok":false,"error":"op"})";
}

void send_all(int fd, const std::string& data) {
  size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) throw TransportError("send failed");
    sent += static_cast<size_t>(n);
  }
}

void serve_connection(LocalOracle& oracle, int fd) {
  std::string buffer;
  char chunk[4096];
  for (;;) {
    ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<size_t>(n));
    size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      try {
        send_all(fd, handle_request(oracle, line) + "\n");
      } catch (const TransportError&) {
        ::close(fd);
        return;
      }
    }
  }
  ::close(fd);
}

}  // namespace

LocalOracle::LocalOracle(Matrix posteriors, int defense_k)
    : posteriors_(std::move(posteriors)), defense_k_(defense_k) {
  if (defense_k_ < 0 || defense_k_ > posteriors_.cols)
    throw ConfigError("defense k outside [0, num_classes]");
}

std::vector<double> LocalOracle::query(int node) {
  count_.fetch_add(1, std::memory_order_relaxed);
  if (node < 0 || node >= posteriors_.rows)
    throw OracleError("unknown node " + std::to_string(node));
  auto row = posteriors_.row(node);
  std::vector<double> p(row.begin(), row.end());
  if (defense_k_ > 0 && defense_k_ < posteriors_.cols)
    p = topk_truncate(p, defense_k_);
  return p;
}

OracleServer::OracleServer(Matrix posteriors, int port, int defense_k)
    : oracle_(std::make_unique<LocalOracle>(std::move(posteriors), defense_k)),
      port_(port) {}

OracleServer::~OracleServer() { stop(); }

void OracleServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError("socket() failed");
  int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(static_cast<uint16_t>(port_));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0)
    throw TransportError("bind() failed on port " + std::to_string(port_));
  if (::listen(listen_fd_, 16) < 0) throw TransportError("listen() failed");
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_.store(true);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void OracleServer::accept_loop() {
  std::vector<std::thread> workers;
  while (running_.load()) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;  // listen socket closed by stop()
    workers.emplace_back(
        [this, fd] { serve_connection(*oracle_, fd); });
  }
  for (auto& w : workers) w.join();
}

void OracleServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  listen_fd_ = -1;
}

uint64_t OracleServer::query_count() const { return oracle_->query_count(); }

void serve_stdio(Matrix posteriors, int defense_k, std::istream& in,
                 std::ostream& out) {
  LocalOracle oracle(std::move(posteriors), defense_k);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << handle_request(oracle, line) << '\n';
    out.flush();
  }
}

RemoteOracle::RemoteOracle(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints,
                    &res) != 0 ||
      !res)
    throw TransportError("cannot resolve " + host);
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0 || ::connect(fd_, res->ai_addr, res->ai_addrlen) < 0) {
    ::freeaddrinfo(res);
    throw TransportError("cannot connect to " + host + ":" +
                         std::to_string(port));
  }
  ::freeaddrinfo(res);

  json meta = json::parse(request(R"({"op":"meta"})"), nullptr, false);
  if (meta.is_discarded() || meta.value("ok", false) == false)
    throw TransportError("oracle meta request failed");
  num_classes_ = meta.at("num_classes").get<int>();
  node_count_ = meta.at("node_count").get<int>();
}

RemoteOracle::~RemoteOracle() {
  if (fd_ >= 0) ::close(fd_);
}

std::string RemoteOracle::request(const std::string& line) {
  send_all(fd_, line + "\n");
  size_t pos;
  while ((pos = buffer_.find('\n')) == std::string::npos) {
    char chunk[4096];
    ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n <= 0) throw TransportError("connection closed by oracle");
    buffer_.append(chunk, static_cast<size_t>(n));
  }
  std::string reply = buffer_.substr(0, pos);
  buffer_.erase(0, pos + 1);
  return reply;
}

std::vector<double> RemoteOracle::query(int node) {
  count_.fetch_add(1, std::memory_order_relaxed);
  json reply = json::parse(
      request(json{{"op", "query"}, {"node", node}}.dump()), nullptr, false);
  if (reply.is_discarded())
    throw TransportError("malformed oracle reply");
  if (!reply.value("ok", false)) {
    const std::string code = reply.value("error", "?");
    if (code == "node") throw OracleError("unknown node " + std::to_string(node));
    throw TransportError("oracle error: " + code);
  }
  return reply.at("posteriors").get<std::vector<double>>();
}

std::optional<std::pair<std::string, int>> parse_oracle_url(
    const std::string& url) {
  const std::string prefix = "tcp://";
  if (url.rfind(prefix, 0) != 0) return std::nullopt;
  const auto colon = url.rfind(':');
  if (colon <= prefix.size()) return std::nullopt;
  const std::string host = url.substr(prefix.size(), colon - prefix.size());
  try {
    return std::make_pair(host, std::stoi(url.substr(colon + 1)));
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace linktheft
