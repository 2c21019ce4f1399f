#include "v6ready/message.hpp"

#include <string>

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

void encode_record(std::vector<std::uint8_t>& out, const ResourceRecord& rr) {
  rr.validate();
  append_name(out, rr.owner);
  put16(out, rr.type.value);
  put16(out, rr.rrclass.value);
  put32(out, rr.ttl);
  std::vector<std::uint8_t> rdata;
  if (const auto* n = rr.target()) {
    append_name(rdata, *n);
  } else if (const auto* a = rr.address()) {
    auto b = a->bytes();
    rdata.assign(b.begin(), b.end());
  } else {
    rdata = *rr.raw_data();
  }
  if (rdata.size() > 0xffff) throw WireError(WireError::Code::MessageTooLarge, "rdata too large");
  put16(out, static_cast<std::uint16_t>(rdata.size()));
  out.insert(out.end(), rdata.begin(), rdata.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> wire) : wire_(wire) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  std::size_t size() const { return wire_.size(); }

  std::uint8_t u8() {
    need(1);
    return wire_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    auto v = static_cast<std::uint16_t>((wire_[pos_] << 8) | wire_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = wire_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  /// Reads a possibly compressed name starting at the current position.
  DomainName name() {
    std::vector<std::string> labels;
    std::size_t p = pos_;
    std::size_t end = 0;  // position after the name in the original stream
    bool jumped = false;
    std::size_t wire_len = 1;
    int hops = 0;
    while (true) {
      if (p >= wire_.size()) throw WireError(WireError::Code::Truncated, "name runs past end");
      std::uint8_t len = wire_[p];
      if ((len & 0xc0) == 0xc0) {
        if (p + 1 >= wire_.size()) throw WireError(WireError::Code::Truncated, "pointer truncated");
        std::size_t target = static_cast<std::size_t>(((len & 0x3f) << 8) | wire_[p + 1]);
        if (!jumped) end = p + 2;
        if (target >= p || ++hops > 64)
          throw WireError(WireError::Code::BadPointer, "compression pointer loop");
        p = target;
        jumped = true;
        continue;
      }
      if (len & 0xc0) throw WireError(WireError::Code::BadLabel, "unsupported label type");
      if (len == 0) {
        if (!jumped) end = p + 1;
        break;
      }
      if (p + 1 + len > wire_.size()) throw WireError(WireError::Code::Truncated, "label truncated");
      wire_len += len + 1u;
      if (wire_len > DomainName::kMaxWire)
        throw WireError(WireError::Code::NameTooLong, "name exceeds 255 bytes");
      labels.emplace_back(reinterpret_cast<const char*>(wire_.data() + p + 1), len);
      p += 1 + len;
    }
    pos_ = end;
    try {
      return DomainName::from_labels(std::move(labels));
    } catch (const NameError& e) {
      throw WireError(WireError::Code::BadLabel, e.what());
    }
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > wire_.size()) throw WireError(WireError::Code::Truncated, "message truncated");
  }

  std::span<const std::uint8_t> wire_;
  std::size_t pos_ = 0;
};

ResourceRecord decode_record(Reader& r) {
  ResourceRecord rr;
  rr.owner = r.name();
  rr.type = RRType{r.u16()};
  rr.rrclass = RRClass{r.u16()};
  rr.ttl = r.u32();
  std::uint16_t rdlen = r.u16();
  std::size_t start = r.pos();
  if (start + rdlen > r.size()) throw WireError(WireError::Code::Truncated, "rdata truncated");
  std::size_t stop = start + rdlen;

  auto expect_end = [&] {
    if (r.pos() != stop) throw WireError(WireError::Code::BadRdata, "rdata length mismatch");
  };

  if (rr.type == rrtype::NS || rr.type == rrtype::CNAME) {
    rr.data = r.name();
    expect_end();
  } else if (rr.type == rrtype::A || rr.type == rrtype::AAAA) {
    std::size_t want = rr.type == rrtype::A ? 4 : 16;
    if (rdlen != want) throw WireError(WireError::Code::BadRdata, "bad address length");
    rr.data = *IpAddress::from_bytes(r.take(rdlen));
  } else if (rr.type == rrtype::SOA) {
    std::vector<std::uint8_t> raw;
    append_name(raw, r.name());
    append_name(raw, r.name());
    auto rest = r.take(20);
    raw.insert(raw.end(), rest.begin(), rest.end());
    expect_end();
    rr.data = std::move(raw);
  } else if (rr.type == rrtype::MX) {
    std::vector<std::uint8_t> raw;
    put16(raw, r.u16());
    append_name(raw, r.name());
    expect_end();
    rr.data = std::move(raw);
  } else {
    auto b = r.take(rdlen);
    rr.data = std::vector<std::uint8_t>(b.begin(), b.end());
  }
  r.seek(stop);
  return rr;
}

}  // namespace

DnsMessage DnsMessage::make_query(const DomainName& qname, RRType qtype, RRClass qclass,
                                  std::uint16_t id) {
  DnsMessage m;
  m.id = id;
  m.question = Question{qname, qtype, qclass};
  return m;
}

DnsMessage DnsMessage::make_response(const DnsMessage& query) {
  DnsMessage m;
  m.id = query.id;
  m.qr = true;
  m.opcode = query.opcode;
  m.rd = query.rd;
  m.question = query.question;
  if (query.edns) m.edns = Edns{};
  return m;
}

std::vector<std::uint8_t> encode(const DnsMessage& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(512);
  put16(out, msg.id);
  std::uint16_t flags = 0;
  if (msg.qr) flags |= 0x8000;
  flags |= static_cast<std::uint16_t>((msg.opcode & 0x0f) << 11);
  if (msg.aa) flags |= 0x0400;
  if (msg.tc) flags |= 0x0200;
  if (msg.rd) flags |= 0x0100;
  if (msg.ra) flags |= 0x0080;
  flags |= static_cast<std::uint16_t>(static_cast<std::uint8_t>(msg.rcode) & 0x0f);
  put16(out, flags);
  put16(out, msg.question ? 1 : 0);
  put16(out, static_cast<std::uint16_t>(msg.answer.size()));
  put16(out, static_cast<std::uint16_t>(msg.authority.size()));
  put16(out, static_cast<std::uint16_t>(msg.additional.size() + (msg.edns ? 1 : 0)));
  if (msg.question) {
    append_name(out, msg.question->name);
    put16(out, msg.question->type.value);
    put16(out, msg.question->rrclass.value);
  }
  for (const auto& rr : msg.answer) encode_record(out, rr);
  for (const auto& rr : msg.authority) encode_record(out, rr);
  for (const auto& rr : msg.additional) encode_record(out, rr);
  if (msg.edns) {
    out.push_back(0);  // root owner
    put16(out, rrtype::OPT.value);
    put16(out, msg.edns->udp_payload_size);
    put32(out, 0);  // extended rcode, version, flags
    put16(out, 0);  // no options
  }
  if (out.size() > kMaxTcpMessage)
    throw WireError(WireError::Code::MessageTooLarge, "message exceeds 65535 bytes");
  return out;
}

DnsMessage decode(std::span<const std::uint8_t> wire) {
  Reader r(wire);
  DnsMessage m;
  m.id = r.u16();
  std::uint16_t flags = r.u16();
  m.qr = flags & 0x8000;
  m.opcode = static_cast<std::uint8_t>((flags >> 11) & 0x0f);
  m.aa = flags & 0x0400;
  m.tc = flags & 0x0200;
  m.rd = flags & 0x0100;
  m.ra = flags & 0x0080;
  m.rcode = static_cast<Rcode>(flags & 0x0f);
  std::uint16_t qd = r.u16(), an = r.u16(), ns = r.u16(), ar = r.u16();
  if (qd > 1) throw WireError(WireError::Code::BadRdata, "multiple questions unsupported");
  if (qd == 1) {
    Question q;
    q.name = r.name();
    q.type = RRType{r.u16()};
    q.rrclass = RRClass{r.u16()};
    m.question = std::move(q);
  }
  for (int i = 0; i < an; ++i) m.answer.push_back(decode_record(r));
  for (int i = 0; i < ns; ++i) m.authority.push_back(decode_record(r));
  for (int i = 0; i < ar; ++i) {
    auto rr = decode_record(r);
    if (rr.type == rrtype::OPT && !m.edns) {
      m.edns = Edns{rr.rrclass.value};
      continue;
    }
    m.additional.push_back(std::move(rr));
  }
  if (r.pos() != wire.size()) throw WireError(WireError::Code::Trailing, "trailing bytes after message");
  return m;
}

std::string_view to_string(Rcode rc) {
  switch (rc) {
    case Rcode::NoError: return "NOERROR";
    case Rcode::FormErr: return "FORMERR";
    case Rcode::ServFail: return "SERVFAIL";
    case Rcode::NXDomain: return "NXDOMAIN";
    case Rcode::NotImp: return "NOTIMP";
    case Rcode::Refused: return "REFUSED";
  }
  return "RCODE?";
}

}  // namespace v6ready
