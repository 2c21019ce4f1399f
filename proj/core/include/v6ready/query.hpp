#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "v6ready/message.hpp"
#include "v6ready/name.hpp"
#include "v6ready/types.hpp"

namespace v6ready {

using Millis = std::chrono::milliseconds;

class PolicyViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct QueryPolicy {
  int max_retries = 4;
  Millis retry_wait{20000};
  Millis udp_timeout{3000};
  Millis tcp_timeout{10000};
  std::uint16_t edns_payload = 1232;

  /// Throws PolicyViolation.
  void validate() const;
};

enum class TransportKind : std::uint8_t { udp, tcp };
std::string_view to_string(TransportKind t);

/// One request/response exchange. Implementations: real sockets, the mock
/// network, and test doubles.
class Transport {
 public:
  struct Reply {
    enum class Status { ok, timeout, unreachable } status = Status::timeout;
    std::vector<std::uint8_t> payload;
  };

  virtual ~Transport() = default;
  virtual Reply exchange(const IpAddress& server, TransportKind kind,
                         std::span<const std::uint8_t> query, Millis timeout) = 0;
  /// Inter-retry wait. The mock network advances its virtual clock instead.
  virtual void pause(Millis d);
};

struct QueryOutcome {
  enum class Kind : std::uint8_t { response, timeout, unreachable, malformed };

  Kind kind = Kind::timeout;
  std::optional<DnsMessage> message;  // set iff kind == response
  TransportKind transport = TransportKind::udp;
  bool edns_used = true;
  int attempts = 0;  // network exchanges spent, across all paths

  bool ok() const noexcept { return kind == Kind::response; }
};
std::string_view to_string(QueryOutcome::Kind k);

struct CacheKey {
  IpAddress server;
  DomainName qname;
  RRType qtype;
  RRClass qclass = rrclass::IN;

  friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

/// Run-scoped cache of final outcomes, failures included. Concurrent lookups of
/// the same key share one in-flight exchange.
class ResponseCache {
 public:
  struct Entry {
    QueryOutcome outcome;
    std::chrono::system_clock::time_point inserted;
  };

  /// Returns the cached outcome, or runs `compute` exactly once per key.
  QueryOutcome get_or_compute(const CacheKey& key, const std::function<QueryOutcome()>& compute);
  std::optional<Entry> peek(const CacheKey& key) const;
  std::size_t size() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::map<CacheKey, std::shared_future<Entry>> entries_;
};

class QueryEngine {
 public:
  QueryEngine(Transport& transport, QueryPolicy policy, ResponseCache* cache = nullptr,
              std::uint64_t seed = std::random_device{}());

  QueryOutcome query(const IpAddress& server, const DomainName& qname, RRType qtype,
                     RRClass qclass = rrclass::IN);

  const QueryPolicy& policy() const noexcept { return policy_; }
  ResponseCache* cache() const noexcept { return cache_; }
  /// Network exchanges issued by this engine (cache hits excluded).
  std::uint64_t exchanges() const;

 private:
  QueryOutcome run(const IpAddress& server, const DomainName& qname, RRType qtype, RRClass qclass);
  std::uint16_t next_id();

  Transport& transport_;
  QueryPolicy policy_;
  ResponseCache* cache_;
  mutable std::mutex rng_mu_;
  std::mt19937_64 rng_;
  std::uint64_t exchanges_ = 0;
};

}  // namespace v6ready
