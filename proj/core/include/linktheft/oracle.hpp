#pragma once

#include <atomic>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "linktheft/matrix.hpp"

namespace linktheft {

/// The black-box boundary: every attack observation of the target model goes
/// through this interface, by node id only.
class PosteriorOracle {
 public:
  virtual ~PosteriorOracle() = default;
  /// Throws OracleError on an unknown node (the query still counts).
  virtual std::vector<double> query(int node) = 0;
  virtual int num_classes() const = 0;
  virtual int node_count() const = 0;
  virtual uint64_t query_count() const = 0;
};

/// In-process oracle over a precomputed posterior matrix. With defense_k > 0
/// every response is truncated to its k largest entries and renormalized.
class LocalOracle : public PosteriorOracle {
 public:
  explicit LocalOracle(Matrix posteriors, int defense_k = 0);

  std::vector<double> query(int node) override;
  int num_classes() const override { return posteriors_.cols; }
  int node_count() const override { return posteriors_.rows; }
  uint64_t query_count() const override { return count_.load(); }

 private:
  Matrix posteriors_;
  int defense_k_;
  std::atomic<uint64_t> count_{0};
};

/// Wire protocol (TCP or stdio): newline-delimited JSON.
///   {"op":"meta"}                -> {"ok":true,"num_classes":C,"node_count":N}
///   {"op":"query","node":<int>}  -> {"ok":true,"posteriors":[...]}
///   errors                       -> {"ok":false,"error":"<code>"}
/// Error codes: "parse" (bad JSON), "op" (unknown op), "node" (bad node id).
/// Malformed requests leave the connection open.

/// Serves an oracle over TCP. Connections are handled concurrently; the
/// backing posteriors are immutable and shared.
class OracleServer {
 public:
  /// port 0 picks an ephemeral port (see port() after start()).
  OracleServer(Matrix posteriors, int port = 0, int defense_k = 0);
  ~OracleServer();

  void start();
  void stop();
  int port() const { return port_; }
  uint64_t query_count() const;

 private:
  void accept_loop();

  std::unique_ptr<LocalOracle> oracle_;
  int port_;
  int listen_fd_ = -1;
  std::thread accept_thread_;
  std::atomic<bool> running_{false};
};

/// Stdio transport: one request per input line, one response per output line,
/// until EOF. Used by `linktheft serve --stdio`.
void serve_stdio(Matrix posteriors, int defense_k, std::istream& in,
                 std::ostream& out);

/// Client for the wire protocol. Fetches meta once at construction.
class RemoteOracle : public PosteriorOracle {
 public:
  RemoteOracle(const std::string& host, int port);
  ~RemoteOracle();

  std::vector<double> query(int node) override;
  int num_classes() const override { return num_classes_; }
  int node_count() const override { return node_count_; }
  uint64_t query_count() const override { return count_.load(); }

 private:
  std::string request(const std::string& line);

  int fd_ = -1;
  int num_classes_ = 0;
  int node_count_ = 0;
  std::atomic<uint64_t> count_{0};
  std::string buffer_;
};

/// Parses "tcp://host:port"; returns nullopt for anything else.
std::optional<std::pair<std::string, int>> parse_oracle_url(
    const std::string& url);

}  // namespace linktheft
