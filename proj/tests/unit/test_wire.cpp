#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "test_support.hpp"
#include "v6ready/message.hpp"

using namespace v6ready;
using v6ready::testing::dn;
using v6ready::testing::ip;

namespace {

// Minimal reader written against RFC 1035 directly, independent of decode().
struct PlainQuestion {
  std::uint16_t id, flags, qd, an, ns, ar;
  std::vector<std::string> labels;
  std::uint16_t qtype, qclass;
  std::size_t end;
};

PlainQuestion read_plain(const std::vector<std::uint8_t>& b) {
  auto u16 = [&](std::size_t at) { return static_cast<std::uint16_t>(b.at(at) << 8 | b.at(at + 1)); };
  PlainQuestion q{u16(0), u16(2), u16(4), u16(6), u16(8), u16(10), {}, 0, 0, 0};
  std::size_t at = 12;
  while (b.at(at) != 0) {
    std::size_t len = b[at];
    q.labels.emplace_back(reinterpret_cast<const char*>(&b[at + 1]), len);
    at += len + 1;
  }
  ++at;
  q.qtype = u16(at);
  q.qclass = u16(at + 2);
  q.end = at + 4;
  return q;
}

}  // namespace

TEST(Wire, MinimalNsQueryGoldenBytes) {
  auto m = DnsMessage::make_query(dn("com"), rrtype::NS, rrclass::IN, 0x1234);
  auto bytes = encode(m);
  const std::vector<std::uint8_t> golden = {0x12, 0x34, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00,
                                            0x00, 0x03, 'c',  'o',  'm',  0x00, 0x00, 0x02, 0x00, 0x01};
  ASSERT_EQ(bytes.size(), 21u);
  EXPECT_EQ(bytes, golden);

  auto plain = read_plain(bytes);
  EXPECT_EQ(plain.id, 0x1234);
  EXPECT_EQ(plain.qd, 1);
  EXPECT_EQ(plain.an + plain.ns + plain.ar, 0);
  EXPECT_EQ(plain.labels, std::vector<std::string>{"com"});
  EXPECT_EQ(plain.qtype, 2);
  EXPECT_EQ(plain.qclass, 1);
  EXPECT_EQ(plain.end, bytes.size());
}

TEST(Wire, RootQuestionIsOneZeroByte) {
  auto bytes = encode(DnsMessage::make_query(DomainName::root(), rrtype::NS));
  ASSERT_EQ(bytes.size(), 12u + 1u + 4u);
  EXPECT_EQ(bytes[12], 0);
}

TEST(Wire, EdnsAddsOptRecord) {
  auto m = DnsMessage::make_query(dn("example.org"), rrtype::AAAA);
  m.edns = Edns{1232};
  auto bytes = encode(m);
  auto plain = read_plain(bytes);
  EXPECT_EQ(plain.ar, 1);
  auto back = decode(bytes);
  ASSERT_TRUE(back.edns);
  EXPECT_EQ(back.edns->udp_payload_size, 1232);
  EXPECT_TRUE(back.additional.empty());
}

TEST(Wire, FollowsCompressionPointers) {
  // Response for example.com/A whose answer owner is a pointer to the question.
  std::vector<std::uint8_t> b = {0xab, 0xcd, 0x84, 0x00, 0, 1, 0, 1, 0, 0, 0, 0};
  for (const char* l : {"example", "com"}) {
    b.push_back(static_cast<std::uint8_t>(std::strlen(l)));
    b.insert(b.end(), l, l + std::strlen(l));
  }
  b.insert(b.end(), {0, 0, 1, 0, 1});
  b.insert(b.end(), {0xc0, 0x0c, 0, 1, 0, 1, 0, 0, 0x0e, 0x10, 0, 4, 192, 0, 2, 7});
  auto m = decode(b);
  EXPECT_TRUE(m.qr);
  EXPECT_TRUE(m.aa);
  ASSERT_EQ(m.answer.size(), 1u);
  EXPECT_EQ(m.answer[0].owner, dn("example.com"));
  EXPECT_EQ(*m.answer[0].address(), ip("192.0.2.7"));
  EXPECT_EQ(m.answer[0].ttl, 3600u);
}

TEST(Wire, RejectsForwardAndLoopingPointers) {
  std::vector<std::uint8_t> fwd = {0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0xc0, 0x20, 0, 1, 0, 1};
  try {
    decode(fwd);
    FAIL();
  } catch (const WireError& e) {
    EXPECT_EQ(e.code(), WireError::Code::BadPointer);
  }
  std::vector<std::uint8_t> self = {0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0xc0, 0x0c, 0, 1, 0, 1};
  EXPECT_THROW(decode(self), WireError);
}

TEST(Wire, RejectsTruncatedAndTrailing) {
  auto bytes = encode(DnsMessage::make_query(dn("example.org"), rrtype::A));
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  try {
    decode(cut);
    FAIL();
  } catch (const WireError& e) {
    EXPECT_EQ(e.code(), WireError::Code::Truncated);
  }
  auto extra = bytes;
  extra.push_back(0);
  try {
    decode(extra);
    FAIL();
  } catch (const WireError& e) {
    EXPECT_EQ(e.code(), WireError::Code::Trailing);
  }
  EXPECT_THROW(decode(std::vector<std::uint8_t>{1, 2, 3}), WireError);
}

namespace {

DomainName random_name(std::mt19937_64& rng) {
  static const char* pool[] = {"a", "example", "ns1", "com", "org", "Sub", "x-y", "z0", "root-servers"};
  int n = static_cast<int>(rng() % 5);
  std::string s;
  for (int i = 0; i < n; ++i) s += std::string(pool[rng() % 9]) + ".";
  return s.empty() ? DomainName::root() : DomainName::parse(s);
}

ResourceRecord random_record(std::mt19937_64& rng) {
  auto owner = random_name(rng);
  auto ttl = static_cast<std::uint32_t>(rng() % 100000);
  switch (rng() % 6) {
    case 0: return ResourceRecord::ns(owner, random_name(rng), ttl);
    case 1: {
      std::array<std::uint8_t, 4> b;
      for (auto& x : b) x = static_cast<std::uint8_t>(rng());
      return ResourceRecord::address(owner, IpAddress::v4(b), ttl);
    }
    case 2: {
      std::array<std::uint8_t, 16> b;
      for (auto& x : b) x = static_cast<std::uint8_t>(rng());
      return ResourceRecord::address(owner, IpAddress::v6(b), ttl);
    }
    case 3: return make_txt(owner, {"v=spf1 -all", std::string(rng() % 40, 't')}, ttl);
    case 4: {
      SoaData s;
      s.mname = random_name(rng);
      s.rname = random_name(rng);
      s.serial = static_cast<std::uint32_t>(rng());
      return make_soa(owner, s, ttl);
    }
    default: return make_mx(owner, {static_cast<std::uint16_t>(rng()), random_name(rng)}, ttl);
  }
}

}  // namespace

TEST(Wire, RoundTripProperty) {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 500; ++trial) {
    DnsMessage m;
    m.id = static_cast<std::uint16_t>(rng());
    m.qr = rng() & 1;
    m.aa = rng() & 1;
    m.tc = rng() & 1;
    m.rd = rng() & 1;
    m.ra = rng() & 1;
    m.rcode = static_cast<Rcode>(rng() % 6);
    if (rng() % 4) m.question = Question{random_name(rng), rrtype::NS, rrclass::IN};
    for (auto* section : {&m.answer, &m.authority, &m.additional}) {
      int n = static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) section->push_back(random_record(rng));
    }
    if (rng() & 1) m.edns = Edns{static_cast<std::uint16_t>(512 + rng() % 4000)};
    auto back = decode(encode(m));
    ASSERT_EQ(back, m) << "trial " << trial;
  }
}

TEST(Wire, RecordAccessorsReadBackRdata) {
  SoaData s;
  s.mname = dn("ns1.example.com");
  s.rname = dn("hostmaster.example.com");
  s.serial = 42;
  auto soa = make_soa(dn("example.com"), s);
  EXPECT_EQ(parse_soa(soa), s);
  auto mx = make_mx(dn("example.com"), {10, dn("mail.example.com")});
  EXPECT_EQ(parse_mx(mx).exchange, dn("mail.example.com"));
  auto txt = make_txt(dn("example.com"), {"hello", "world"});
  EXPECT_EQ(parse_txt(txt), (std::vector<std::string>{"hello", "world"}));
}
