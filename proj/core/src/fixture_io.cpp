#include <fstream>
#include <sstream>

#include "json.hpp"
#include "v6ready/mock_net.hpp"

namespace v6ready {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw FixtureError(FixtureError::Code::InvalidFixture, what); }

IpAddress address_of(const json& j) {
  if (!j.is_string()) bad("address must be a string");
  auto a = IpAddress::parse(j.get<std::string>());
  if (!a) bad("bad address: " + j.get<std::string>());
  return *a;
}

std::vector<IpAddress> addresses_of(const json& j) {
  std::vector<IpAddress> out;
  if (j.is_null()) return out;
  if (!j.is_array()) bad("addresses must be an array");
  for (const auto& a : j) out.push_back(address_of(a));
  return out;
}

DomainName name_of(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) bad(std::string("missing ") + field);
  try {
    return DomainName::parse(j[field].get<std::string>());
  } catch (const NameError& e) {
    bad(e.what());
  }
}

json addresses_json(const std::vector<IpAddress>& v) {
  json out = json::array();
  for (const auto& a : v) out.push_back(a.to_string());
  return out;
}

}  // namespace

Fixture parse_fixture(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(std::string("fixture is not JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("fixture must be an object");
  Fixture fx;
  try {
    for (const auto& zj : doc.value("zones", json::array())) {
      FixtureZone z;
      z.zone = name_of(zj, "zone");
      z.serial = zj.value("serial", 1u);
      for (const auto& d : zj.value("defects", json::array())) {
        auto def = parse_defect(d.get<std::string>());
        if (!def) bad("unknown defect: " + d.get<std::string>());
        z.defects.insert(*def);
      }
      for (const auto& t : zj.value("txt", json::array())) z.txt.push_back(t.get<std::string>());
      for (const auto& m : zj.value("mx", json::array()))
        z.mx.push_back({m.value("preference", std::uint16_t{10}), name_of(m, "exchange")});
      for (const auto& nj : zj.value("ns", json::array())) {
        FixtureNs ns;
        ns.name = name_of(nj, "name");
        ns.addresses = addresses_of(nj.value("addresses", json::array()));
        ns.in_parent = nj.value("in_parent", true);
        ns.in_child = nj.value("in_child", true);
        if (nj.contains("glue")) ns.glue = addresses_of(nj["glue"]);
        ns.version = nj.value("version", std::string{});
        if (nj.contains("serial")) ns.serial = nj["serial"].get<std::uint32_t>();
        z.ns.push_back(std::move(ns));
      }
      fx.zones.push_back(std::move(z));
    }
    for (const auto& hj : doc.value("hosts", json::array()))
      fx.hosts.push_back({name_of(hj, "name"), addresses_of(hj.value("addresses", json::array()))});
  } catch (const json::exception& e) {
    bad(std::string("bad fixture field: ") + e.what());
  }
  return fx;
}

Fixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open fixture " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fixture(ss.str());
}

std::string fixture_to_json(const Fixture& fx) {
  json doc;
  doc["zones"] = json::array();
  for (const auto& z : fx.zones) {
    json zj;
    zj["zone"] = z.zone.to_string();
    zj["serial"] = z.serial;
    if (!z.defects.empty()) {
      zj["defects"] = json::array();
      for (auto d : z.defects) zj["defects"].push_back(std::string(defect_id(d)));
    }
    if (!z.txt.empty()) zj["txt"] = z.txt;
    if (!z.mx.empty()) {
      zj["mx"] = json::array();
      for (const auto& m : z.mx) zj["mx"].push_back({{"preference", m.preference}, {"exchange", m.exchange.to_string()}});
    }
    zj["ns"] = json::array();
    for (const auto& n : z.ns) {
      json nj;
      nj["name"] = n.name.to_string();
      nj["addresses"] = addresses_json(n.addresses);
      if (!n.in_parent) nj["in_parent"] = false;
      if (!n.in_child) nj["in_child"] = false;
      if (n.glue) nj["glue"] = addresses_json(*n.glue);
      if (!n.version.empty()) nj["version"] = n.version;
      if (n.serial) nj["serial"] = *n.serial;
      zj["ns"].push_back(std::move(nj));
    }
    doc["zones"].push_back(std::move(zj));
  }
  if (!fx.hosts.empty()) {
    doc["hosts"] = json::array();
    for (const auto& h : fx.hosts) doc["hosts"].push_back({{"name", h.name.to_string()}, {"addresses", addresses_json(h.addresses)}});
  }
  return doc.dump(2);
}

}  // namespace v6ready
