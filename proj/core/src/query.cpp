#include "v6ready/query.hpp"

#include <thread>

namespace v6ready {

void QueryPolicy::validate() const {
  if (max_retries < 1) throw PolicyViolation("max_retries must be at least 1");
  if (retry_wait.count() < 0 || udp_timeout.count() < 0 || tcp_timeout.count() < 0)
    throw PolicyViolation("waits and timeouts must be non-negative");
  if (edns_payload < 512) throw PolicyViolation("edns payload below 512 bytes");
}

void Transport::pause(Millis d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

std::string_view to_string(TransportKind t) { return t == TransportKind::udp ? "udp" : "tcp"; }

std::string_view to_string(QueryOutcome::Kind k) {
  switch (k) {
    case QueryOutcome::Kind::response: return "response";
    case QueryOutcome::Kind::timeout: return "timeout";
    case QueryOutcome::Kind::unreachable: return "unreachable";
    case QueryOutcome::Kind::malformed: return "malformed";
  }
  return "?";
}

QueryOutcome ResponseCache::get_or_compute(const CacheKey& key,
                                           const std::function<QueryOutcome()>& compute) {
  std::promise<Entry> promise;
  std::shared_future<Entry> existing;
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end())
      existing = it->second;
    else
      entries_.emplace(key, promise.get_future().share());
  }
  if (existing.valid()) return existing.get().outcome;
  try {
    Entry e{compute(), std::chrono::system_clock::now()};
    promise.set_value(e);
    return e.outcome;
  } catch (...) {
    {
      std::lock_guard lock(mu_);
      entries_.erase(key);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::optional<ResponseCache::Entry> ResponseCache::peek(const CacheKey& key) const {
  std::shared_future<Entry> fut;
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    fut = it->second;
  }
  if (fut.wait_for(std::chrono::seconds(0)) != std::future_status::ready) return std::nullopt;
  return fut.get();
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void ResponseCache::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
}

QueryEngine::QueryEngine(Transport& transport, QueryPolicy policy, ResponseCache* cache,
                         std::uint64_t seed)
    : transport_(transport), policy_(policy), cache_(cache), rng_(seed) {
  policy_.validate();
}

std::uint64_t QueryEngine::exchanges() const {
  std::lock_guard lock(rng_mu_);
  return exchanges_;
}

std::uint16_t QueryEngine::next_id() {
  std::lock_guard lock(rng_mu_);
  ++exchanges_;
  return static_cast<std::uint16_t>(rng_() & 0xffff);
}

QueryOutcome QueryEngine::query(const IpAddress& server, const DomainName& qname, RRType qtype,
                                RRClass qclass) {
  if (!cache_) return run(server, qname, qtype, qclass);
  return cache_->get_or_compute(CacheKey{server, qname, qtype, qclass},
                                [&] { return run(server, qname, qtype, qclass); });
}

QueryOutcome QueryEngine::run(const IpAddress& server, const DomainName& qname, RRType qtype,
                              RRClass qclass) {
  QueryOutcome out;
  bool edns = true;
  TransportKind kind = TransportKind::udp;

  // Each (transport, edns) combination is a path with its own retry budget.
  while (true) {
    bool switched = false;
    for (int attempt = 0; attempt < policy_.max_retries; ++attempt) {
      if (attempt > 0) transport_.pause(policy_.retry_wait);
      auto msg = DnsMessage::make_query(qname, qtype, qclass, next_id());
      if (edns) msg.edns = Edns{policy_.edns_payload};
      auto wire = encode(msg);
      auto timeout = kind == TransportKind::udp ? policy_.udp_timeout : policy_.tcp_timeout;
      auto reply = transport_.exchange(server, kind, wire, timeout);
      ++out.attempts;
      out.transport = kind;
      out.edns_used = edns;

      if (reply.status == Transport::Reply::Status::unreachable) {
        out.kind = QueryOutcome::Kind::unreachable;
        return out;
      }
      if (reply.status == Transport::Reply::Status::timeout) continue;

      DnsMessage resp;
      try {
        resp = decode(reply.payload);
      } catch (const std::exception&) {
        out.kind = QueryOutcome::Kind::malformed;
        return out;
      }
      if (!resp.qr || resp.id != msg.id || resp.question != msg.question) {
        out.kind = QueryOutcome::Kind::malformed;
        return out;
      }
      if (resp.tc && kind == TransportKind::udp) {
        kind = TransportKind::tcp;
        switched = true;
        break;
      }
      if (resp.rcode == Rcode::FormErr && edns) {
        edns = false;
        switched = true;
        break;
      }
      out.kind = QueryOutcome::Kind::response;
      out.message = std::move(resp);
      return out;
    }
    if (!switched) break;
  }
  out.kind = QueryOutcome::Kind::timeout;
  return out;
}

}  // namespace v6ready
