#include "v6ready/record.hpp"

#include <sstream>

namespace v6ready {

namespace {

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v >> 16));
  put16(out, static_cast<std::uint16_t>(v & 0xffff));
}

// Reads uncompressed names and integers from canonical raw RDATA.
class RawReader {
 public:
  explicit RawReader(const std::vector<std::uint8_t>& data) : data_(data) {}

  DomainName name() {
    std::vector<std::string> labels;
    while (true) {
      std::uint8_t len = byte();
      if (len == 0) break;
      if (len > 63) throw RecordError("compressed or invalid name in raw rdata");
      need(len);
      labels.emplace_back(reinterpret_cast<const char*>(data_.data() + pos_), len);
      pos_ += len;
    }
    return DomainName::from_labels(std::move(labels));
  }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }

  std::uint8_t byte() {
    need(1);
    return data_[pos_++];
  }

  bool done() const { return pos_ == data_.size(); }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw RecordError("raw rdata truncated");
  }

  const std::vector<std::uint8_t>& data_;
  std::size_t pos_ = 0;
};

const std::vector<std::uint8_t>& raw_of(const ResourceRecord& rr, RRType expected) {
  if (rr.type != expected) throw RecordError("record is not " + expected.to_string());
  const auto* raw = rr.raw_data();
  if (!raw) throw RecordError("record has no raw rdata");
  return *raw;
}

}  // namespace

void append_name(std::vector<std::uint8_t>& out, const DomainName& name) {
  for (const auto& label : name.labels()) {
    out.push_back(static_cast<std::uint8_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
  }
  out.push_back(0);
}

ResourceRecord ResourceRecord::ns(DomainName owner, DomainName target, std::uint32_t ttl) {
  return {std::move(owner), rrtype::NS, rrclass::IN, ttl, std::move(target), {}};
}

ResourceRecord ResourceRecord::address(DomainName owner, IpAddress addr, std::uint32_t ttl) {
  RRType t = address_type(addr.family());
  return {std::move(owner), t, rrclass::IN, ttl, addr, {}};
}

ResourceRecord ResourceRecord::cname(DomainName owner, DomainName target, std::uint32_t ttl) {
  return {std::move(owner), rrtype::CNAME, rrclass::IN, ttl, std::move(target), {}};
}

ResourceRecord ResourceRecord::raw(DomainName owner, RRType type, std::vector<std::uint8_t> data,
                                   std::uint32_t ttl, RRClass cls) {
  ResourceRecord rr{std::move(owner), type, cls, ttl, std::move(data), {}};
  rr.validate();
  return rr;
}

void ResourceRecord::validate() const {
  if (type == rrtype::A || type == rrtype::AAAA) {
    const auto* a = address();
    IpFamily want = type == rrtype::A ? IpFamily::v4 : IpFamily::v6;
    if (!a || a->family() != want)
      throw RecordError(type.to_string() + " payload must be a " +
                        (want == IpFamily::v4 ? "4" : "16") + "-byte address");
  } else if (type == rrtype::NS || type == rrtype::CNAME) {
    if (!target()) throw RecordError(type.to_string() + " payload must be a name");
  } else if (!raw_data()) {
    throw RecordError(type.to_string() + " payload must be raw bytes");
  }
}

std::string ResourceRecord::rdata_text() const {
  if (const auto* n = target()) return n->to_fqdn();
  if (const auto* a = address()) return a->to_string();
  if (type == rrtype::SOA) {
    auto soa = parse_soa(*this);
    std::ostringstream os;
    os << soa.mname.to_fqdn() << ' ' << soa.rname.to_fqdn() << ' ' << soa.serial << ' '
       << soa.refresh << ' ' << soa.retry << ' ' << soa.expire << ' ' << soa.minimum;
    return os.str();
  }
  if (type == rrtype::MX) {
    auto mx = parse_mx(*this);
    return std::to_string(mx.preference) + " " + mx.exchange.to_fqdn();
  }
  if (type == rrtype::TXT) {
    std::string out;
    for (const auto& s : parse_txt(*this)) {
      if (!out.empty()) out.push_back(' ');
      out += '"' + s + '"';
    }
    return out;
  }
  // RFC 3597 generic form.
  const auto& raw = *raw_data();
  std::ostringstream os;
  os << "\\# " << raw.size();
  static const char* hex = "0123456789abcdef";
  if (!raw.empty()) os << ' ';
  for (auto b : raw) os << hex[b >> 4] << hex[b & 0xf];
  return os.str();
}

ResourceRecord make_soa(const DomainName& owner, const SoaData& soa, std::uint32_t ttl) {
  std::vector<std::uint8_t> raw;
  append_name(raw, soa.mname);
  append_name(raw, soa.rname);
  put32(raw, soa.serial);
  put32(raw, soa.refresh);
  put32(raw, soa.retry);
  put32(raw, soa.expire);
  put32(raw, soa.minimum);
  return ResourceRecord::raw(owner, rrtype::SOA, std::move(raw), ttl);
}

ResourceRecord make_mx(const DomainName& owner, const MxData& mx, std::uint32_t ttl) {
  std::vector<std::uint8_t> raw;
  put16(raw, mx.preference);
  append_name(raw, mx.exchange);
  return ResourceRecord::raw(owner, rrtype::MX, std::move(raw), ttl);
}

ResourceRecord make_txt(const DomainName& owner, const std::vector<std::string>& strings,
                        std::uint32_t ttl, RRClass cls) {
  std::vector<std::uint8_t> raw;
  for (const auto& s : strings) {
    for (std::size_t off = 0; off < s.size() || (off == 0 && s.empty()); off += 255) {
      auto chunk = s.substr(off, 255);
      raw.push_back(static_cast<std::uint8_t>(chunk.size()));
      raw.insert(raw.end(), chunk.begin(), chunk.end());
      if (s.empty()) break;
    }
  }
  return ResourceRecord::raw(owner, rrtype::TXT, std::move(raw), ttl, cls);
}

SoaData parse_soa(const ResourceRecord& rr) {
  RawReader r(raw_of(rr, rrtype::SOA));
  SoaData soa;
  soa.mname = r.name();
  soa.rname = r.name();
  soa.serial = r.u32();
  soa.refresh = r.u32();
  soa.retry = r.u32();
  soa.expire = r.u32();
  soa.minimum = r.u32();
  return soa;
}

MxData parse_mx(const ResourceRecord& rr) {
  RawReader r(raw_of(rr, rrtype::MX));
  MxData mx;
  mx.preference = r.u16();
  mx.exchange = r.name();
  return mx;
}

std::vector<std::string> parse_txt(const ResourceRecord& rr) {
  RawReader r(raw_of(rr, rrtype::TXT));
  std::vector<std::string> out;
  while (!r.done()) {
    auto len = r.byte();
    out.push_back(r.bytes(len));
  }
  return out;
}

}  // namespace v6ready
