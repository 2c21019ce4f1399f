#include "cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "v6ready/analytics.hpp"
#include "v6ready/socket_transport.hpp"

namespace v6ready::cli {

namespace fs = std::filesystem;
using nlohmann::json;

QueryPolicy Config::policy() const {
  QueryPolicy p;
  p.max_retries = retries;
  p.retry_wait = Millis{retry_wait_ms};
  p.udp_timeout = Millis{timeout_ms};
  p.tcp_timeout = Millis{tcp_timeout_ms};
  p.validate();
  return p;
}

ResolverOptions Config::resolver_options() const {
  ResolverOptions o;
  o.filter = filter;
  o.enrich = enrich;
  return o;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Transport and hints owned for the duration of one command.
struct OwnedNetwork {
  std::unique_ptr<Universe> universe;
  std::unique_ptr<SocketTransport> sockets;
  Network net;
};

OwnedNetwork open_network(const Config& cfg) {
  OwnedNetwork o;
  if (!cfg.mock.empty()) {
    o.universe = std::make_unique<Universe>(load_fixture(cfg.mock), cfg.seed);
    o.net.transport = o.universe.get();
    o.net.hints = o.universe->root_hints();
  } else {
    std::map<IpAddress, Endpoint> remap;
    if (!cfg.address_map.empty()) remap = parse_address_map(slurp(cfg.address_map));
    o.sockets = std::make_unique<SocketTransport>(std::move(remap));
    o.net.transport = o.sockets.get();
    o.net.hints = default_root_hints();
  }
  if (!cfg.roots.empty()) o.net.hints = load_root_hints(cfg.roots);
  return o;
}

std::vector<IpAddress> zone_addresses(const ChainResult& r) {
  std::set<IpAddress> all;
  if (const auto* s = r.step(r.zone)) {
    for (const auto& [_, a] : s->glue) all.insert(a.begin(), a.end());
    for (const auto& [_, a] : s->addresses) all.insert(a.begin(), a.end());
  }
  return {all.begin(), all.end()};
}

json causes_ids(const CauseSet& causes) {
  json out = json::array();
  for (const auto& [k, _] : causes) out.push_back(std::string(cause_id(k)));
  return out;
}

constexpr std::array<ResolutionState, 4> kStates = {ResolutionState::dual, ResolutionState::v4_only,
                                                    ResolutionState::v6_only, ResolutionState::none};

}  // namespace

int cmd_check(const std::string& domain, const Config& cfg, std::ostream& out, std::ostream& err,
              const Network* net) {
  try {
    auto target = DomainName::parse(domain);
    OwnedNetwork owned;
    if (!net) {
      owned = open_network(cfg);
      net = &owned.net;
    }
    ResponseCache cache;
    QueryEngine engine(*net->transport, cfg.policy(), &cache, cfg.seed);
    ChainResolver resolver(engine, net->hints, cfg.resolver_options());
    ChainResult result = resolver.resolve_chain(target);

    std::vector<LivenessResult> live;
    if (cfg.probe_liveness) live = probe_ns_liveness(result.zone, zone_addresses(result), engine);

    if (cfg.format == OutputFormat::structured) {
      json doc = json::parse(chain_report_json(result));
      doc["liveness"] = json::array();
      for (const auto& l : live)
        doc["liveness"].push_back({{"address", l.address.to_string()}, {"status", std::string(to_string(l.status))}});
      out << doc.dump(2) << '\n';
    } else {
      out << chain_report_text(result);
      for (const auto& l : live) out << "  liveness " << l.address.to_string() << ": " << to_string(l.status) << '\n';
    }
    return result.resolves(IpFamily::v6) ? kResolvable : kNotResolvable;
  } catch (const std::exception& e) {
    err << "check " << domain << ": " << e.what() << '\n';
    return kError;
  }
}

std::vector<ScanEntry> parse_domain_list(const std::string& text) {
  std::vector<ScanEntry> out;
  for (const auto& [rank, name] : Toplist::parse(text).entries()) out.push_back({name.to_string(), rank});
  // Bare lists are ranked by position; drop the rank when no line had one.
  bool any_comma = text.find(',') != std::string::npos;
  if (!any_comma)
    for (auto& e : out) e.rank.reset();
  return out;
}

int cmd_scan(const std::string& list_path, const Config& cfg, std::ostream& out, std::ostream& err,
             const Network* net) {
  std::vector<ScanEntry> entries;
  OwnedNetwork owned;
  try {
    entries = parse_domain_list(slurp(list_path));
    if (!net) {
      owned = open_network(cfg);
      net = &owned.net;
    }
    cfg.policy();
  } catch (const std::exception& e) {
    err << "scan: " << e.what() << '\n';
    return kError;
  }

  std::map<std::string, json> records;
  if (!cfg.journal.empty() && fs::exists(cfg.journal)) {
    std::ifstream in(cfg.journal);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        auto j = json::parse(line);
        records[j.at("domain").get<std::string>()] = j;
      } catch (const json::exception&) {
        // A torn last line from an interrupted run; the domain is redone.
      }
    }
  }

  std::vector<const ScanEntry*> pending;
  for (const auto& e : entries)
    if (!records.count(e.domain)) pending.push_back(&e);

  std::ofstream journal;
  if (!cfg.journal.empty()) journal.open(cfg.journal, std::ios::app);
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  ResponseCache cache;

  auto worker = [&](std::size_t w) {
    QueryEngine engine(*net->transport, cfg.policy(), &cache, cfg.seed + w);
    auto opts = cfg.resolver_options();
    ChainResolver resolver(engine, net->hints, opts);
    for (std::size_t i; (i = next++) < pending.size();) {
      const auto& e = *pending[i];
      json rec{{"domain", e.domain}};
      if (e.rank) {
        rec["rank"] = *e.rank;
        if (auto t = rank_tier(*e.rank)) rec["tier"] = std::string(to_string(*t));
      }
      try {
        auto r = resolver.resolve_chain(DomainName::parse(e.domain));
        rec["zone"] = r.zone.to_string();
        rec["state"] = std::string(to_string(r.status.state));
        rec["intent_v6"] = r.status.intent_v6;
        rec["v6_failures"] = causes_ids(r.status.v6_failures);
        rec["v4_failures"] = causes_ids(r.status.v4_failures);
      } catch (const std::exception& ex) {
        rec["error"] = ex.what();
      }
      std::lock_guard lock(mu);
      if (journal.is_open()) journal << rec.dump() << '\n' << std::flush;
      records[e.domain] = std::move(rec);
    }
  };

  std::size_t width = std::max<std::size_t>(1, std::min<std::size_t>(cfg.concurrency, pending.size()));
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < width; ++w) threads.emplace_back(worker, w);
  worker(0);
  for (auto& t : threads) t.join();

  std::map<std::string, std::size_t> counts;
  std::size_t failed = 0, done = 0;
  std::ofstream report_file;
  if (!cfg.out.empty()) report_file.open(cfg.out);
  for (const auto& e : entries) {
    const auto& rec = records[e.domain];
    if (report_file.is_open()) report_file << rec.dump() << '\n';
    if (rec.contains("error")) {
      ++failed;
      continue;
    }
    ++done;
    ++counts[rec["state"].get<std::string>()];
  }

  if (cfg.format == OutputFormat::structured) {
    json s{{"domains", entries.size()}, {"resolved", done}, {"errors", failed}, {"queried", pending.size()}};
    for (auto st : kStates) {
      auto n = counts[std::string(to_string(st))];
      s["states"][std::string(to_string(st))] = {
          {"count", n}, {"percent", done ? 100.0 * static_cast<double>(n) / static_cast<double>(done) : 0.0}};
    }
    out << s.dump(2) << '\n';
  } else {
    out << "domains " << entries.size() << "  checked " << done << "  errors " << failed << "  queried now "
        << pending.size() << '\n';
    for (auto st : kStates) {
      auto n = counts[std::string(to_string(st))];
      char pct[32];
      std::snprintf(pct, sizeof pct, "%.1f%%", done ? 100.0 * static_cast<double>(n) / static_cast<double>(done) : 0.0);
      out << "  " << to_string(st) << '\t' << n << '\t' << pct << '\n';
    }
  }
  return 0;
}

int cmd_simulate(const std::vector<std::string>& tuple_files, const Config& cfg, std::ostream& out,
                 std::ostream& err) {
  Ingestor ingestor;
  ReadStats total;
  std::size_t opened = 0;
  for (const auto& f : tuple_files) {
    try {
      auto s = read_tuple_file(f, [&](PassiveTuple&& t) { ingestor.add(t); });
      total.lines += s.lines;
      total.tuples += s.tuples;
      total.malformed += s.malformed;
      ++opened;
    } catch (const std::exception& e) {
      err << "simulate: " << e.what() << '\n';
    }
  }
  if (!tuple_files.empty() && opened == 0) return kError;
  if (total.tuples == 0 && total.malformed > 0) {
    err << "simulate: no readable tuples (" << total.malformed << " malformed lines)\n";
    return kError;
  }

  try {
    ZoneDataset data = ingestor.finish();
    ResolutionTable table = fixed_point(data);
    auto verdicts = build_verdicts(data, table);

    PublicSuffixList psl;
    std::set<std::string> tlds;
    std::optional<Toplist> top;
    OperatorRules rules;
    if (!cfg.psl.empty()) psl = PublicSuffixList::load(cfg.psl);
    if (!cfg.tlds.empty()) tlds = load_tld_list(cfg.tlds);
    if (!cfg.toplist.empty()) top = Toplist::load(cfg.toplist);
    if (!cfg.operators.empty()) rules = OperatorRules::load(cfg.operators);

    auto groups = group_verdicts(verdicts, psl, tlds, top ? &*top : nullptr);
    std::map<std::string, SnapshotStats> stats;
    std::map<std::string, NsSetCdf> cdfs;
    stats["all"] = snapshot_stats(verdicts, cfg.month);
    cdfs["all"] = nsset_cdf(verdicts, psl, rules);
    for (const auto& [label, vs] : groups) {
      stats[label] = snapshot_stats(vs, cfg.month);
      cdfs[label] = nsset_cdf(vs, psl, rules);
    }

    if (!cfg.out.empty()) {
      fs::create_directories(cfg.out);
      std::ofstream v(fs::path(cfg.out) / "verdicts.tsv");
      write_verdicts(v, verdicts);
      std::ofstream s(fs::path(cfg.out) / "snapshot.json");
      s << snapshot_json(stats["all"]) << '\n';
      std::ofstream st(fs::path(cfg.out) / "states.csv");
      write_states_csv(st, cfg.month, stats);
      std::ofstream c(fs::path(cfg.out) / "causes.csv");
      write_causes_csv(c, cfg.month, stats);
      std::ofstream n(fs::path(cfg.out) / "nsset_cdf.csv");
      write_nsset_cdf_csv(n, cfg.month, cdfs);
    }

    const auto& all = stats["all"];
    if (cfg.format == OutputFormat::structured) {
      json doc = json::parse(snapshot_json(all));
      doc["input"] = {{"lines", total.lines}, {"tuples", total.tuples}, {"malformed", total.malformed}};
      doc["passes"] = {{"v4", table.passes[0]}, {"v6", table.passes[1]}};
      doc["nsset"] = {{"sets", cdfs["all"].sets.size()},
                      {"top10_share", cdfs["all"].top10_share},
                      {"top10pct_share", cdfs["all"].top10pct_share}};
      out << doc.dump(2) << '\n';
    } else {
      char line[128];
      out << "tuples " << total.tuples << "  malformed " << total.malformed << "  zones " << all.zones
          << "  unknown parent " << all.unknown_parent << "  passes v4=" << table.passes[0]
          << " v6=" << table.passes[1] << '\n';
      for (auto st : kStates) {
        std::snprintf(line, sizeof line, "  %-8s %8zu  %6.2f%%\n", std::string(to_string(st)).c_str(), all.count(st),
                      all.percent(st));
        out << line;
      }
      out << "  intent-v6 zones not v6-resolvable: " << all.breakdown.population << '\n';
      for (auto k : kAllCauses) {
        std::snprintf(line, sizeof line, "    %-30s %6.2f%%\n", std::string(cause_id(k)).c_str(),
                      all.breakdown.percent(k));
        out << line;
      }
      std::snprintf(line, sizeof line, "  NS sets %zu  top10 %.2f%%  top10%% %.2f%%\n", cdfs["all"].sets.size(),
                    100.0 * cdfs["all"].top10_share, 100.0 * cdfs["all"].top10pct_share);
      out << line;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "simulate: " << e.what() << '\n';
    return kError;
  }
}

int cmd_mock_export(const std::string& fixture, const std::string& mode, TupleFormat fmt, const Config& cfg,
                    std::ostream& out, std::ostream& err) {
  try {
    Universe u(load_fixture(fixture), cfg.seed);
    std::vector<PassiveTuple> tuples;
    if (mode == "model") {
      tuples = export_zone_data(u);
    } else if (mode == "crawl") {
      crawl_universe(u, cfg.policy(), cfg.filter, cfg.seed);
      tuples = export_tuples(u.packets());
    } else {
      err << "mock-export: unknown mode " << mode << '\n';
      return kError;
    }
    std::ofstream file;
    if (!cfg.out.empty()) file.open(cfg.out);
    std::ostream& sink = cfg.out.empty() ? out : file;
    for (const auto& t : tuples) sink << format_tuple(t, fmt) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "mock-export: " << e.what() << '\n';
    return kError;
  }
}

namespace {
std::atomic<bool> g_interrupted{false};
extern "C" void on_signal(int) { g_interrupted = true; }
}  // namespace

int cmd_mock_serve(const std::string& fixture, const std::string& map_path, const std::string& hints_path,
                   int seconds, bool v6_loopback, std::ostream& out, std::ostream& err) {
  try {
    Universe u(load_fixture(fixture));
    LoopbackServer server(u, v6_loopback);
    std::ofstream(map_path) << format_address_map(server.address_map());
    if (!hints_path.empty()) std::ofstream(hints_path) << format_root_hints(u.root_hints());
    out << "serving " << u.zones().size() << " zones on " << server.address_map().size() << " addresses\n"
        << std::flush;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    auto until = std::chrono::steady_clock::now() + std::chrono::seconds(seconds);
    while (!g_interrupted && (seconds == 0 || std::chrono::steady_clock::now() < until))
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    out << "answered " << u.packet_count() << " queries\n";
    return 0;
  } catch (const std::exception& e) {
    err << "mock-serve: " << e.what() << '\n';
    return kError;
  }
}

int cmd_mock_random(std::uint64_t seed, std::size_t size, double defect_rate, const std::string& fixture_path,
                    const std::string& truth_path, std::ostream& out, std::ostream& err) {
  try {
    auto ru = random_universe(seed, size, DefectRates::mixed(defect_rate));
    std::ofstream(fixture_path) << fixture_to_json(ru.fixture) << '\n';
    if (!truth_path.empty()) {
      std::ofstream t(truth_path);
      t << "zone\tv4\tv6\n";
      for (const auto& [z, v] : ru.truth) t << z.to_string() << '\t' << v[0] << '\t' << v[1] << '\n';
    }
    out << "wrote " << ru.fixture.zones.size() << " zones to " << fixture_path << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "mock-random: " << e.what() << '\n';
    return kError;
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"IPv6 resolvability checks for DNS delegation chains"};
  app.require_subcommand(1);
  Config cfg;

  auto add_network = [&](CLI::App* sub) {
    sub->add_option("--roots", cfg.roots, "Root hints file")->envname("V6READY_ROOTS");
    auto* v4 = sub->add_flag_callback("--v4-only", [&] { cfg.filter = ProtocolFilter::v4_only; }, "Walk IPv4 only");
    auto* v6 = sub->add_flag_callback("--v6-only", [&] { cfg.filter = ProtocolFilter::v6_only; }, "Walk IPv6 only");
    v4->excludes(v6);
    sub->add_option("--timeout", cfg.timeout_ms, "UDP timeout (ms)")->envname("V6READY_TIMEOUT");
    sub->add_option("--tcp-timeout", cfg.tcp_timeout_ms, "TCP timeout (ms)")->envname("V6READY_TCP_TIMEOUT");
    sub->add_option("--retries", cfg.retries, "Attempts per transport path")->envname("V6READY_RETRIES");
    sub->add_option("--retry-wait", cfg.retry_wait_ms, "Wait between attempts (ms)")->envname("V6READY_RETRY_WAIT");
    sub->add_option("--seed", cfg.seed, "Seed for query ids")->envname("V6READY_SEED");
    sub->add_option("--address-map", cfg.address_map, "Logical-to-real address map")
        ->envname("V6READY_ADDRESS_MAP");
    sub->add_option("--mock", cfg.mock, "Answer from an in-process fixture")->envname("V6READY_MOCK");
    sub->add_option("--format", cfg.format, "text or structured")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, OutputFormat>{{"text", OutputFormat::text}, {"structured", OutputFormat::structured}}))
        ->envname("V6READY_FORMAT");
  };
  auto add_analytics = [&](CLI::App* sub) {
    sub->add_option("--psl", cfg.psl, "Public suffix list")->envname("V6READY_PSL");
    sub->add_option("--tlds", cfg.tlds, "TLD list")->envname("V6READY_TLDS");
    sub->add_option("--toplist", cfg.toplist, "rank,domain CSV")->envname("V6READY_TOPLIST");
  };

  std::string domain;
  auto* check = app.add_subcommand("check", "Check one zone or name");
  check->add_option("domain", domain)->required();
  add_network(check);
  check->add_flag("!--no-liveness", cfg.probe_liveness, "Skip NS liveness probes");
  check->add_flag("!--no-enrich", cfg.enrich, "Skip NS/TXT/SOA/MX and version.bind collection");

  std::string list;
  auto* scan = app.add_subcommand("scan", "Check every domain in a list");
  scan->add_option("list", list)->required()->check(CLI::ExistingFile);
  add_network(scan);
  add_analytics(scan);
  scan->add_option("--concurrency", cfg.concurrency, "Chains in flight")
      ->check(CLI::Range(1, 1024))
      ->envname("V6READY_CONCURRENCY");
  scan->add_option("--journal", cfg.journal, "Completed-set journal (JSON lines)")->envname("V6READY_JOURNAL");
  scan->add_option("--out", cfg.out, "Per-domain report (JSON lines)")->envname("V6READY_OUT");

  std::vector<std::string> files;
  auto* sim = app.add_subcommand("simulate", "Passive resolvability for one snapshot of tuples");
  sim->add_option("tuples", files, "Tuple files (TSV or JSON lines, optionally gzip)");
  add_analytics(sim);
  sim->add_option("--operators", cfg.operators, "Operator collapse rules")->envname("V6READY_OPERATORS");
  sim->add_option("--month", cfg.month, "Snapshot label");
  sim->add_option("--out", cfg.out, "Output directory")->envname("V6READY_OUT");
  sim->add_option("--format", cfg.format, "text or structured")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, OutputFormat>{{"text", OutputFormat::text}, {"structured", OutputFormat::structured}}));

  std::string fixture, mode = "crawl", tuple_format = "tsv";
  auto* mexp = app.add_subcommand("mock-export", "Export passive tuples from a mock universe");
  mexp->add_option("fixture", fixture)->required()->check(CLI::ExistingFile);
  mexp->add_option("--mode", mode, "crawl or model")->check(CLI::IsMember({"crawl", "model"}));
  mexp->add_option("--tuple-format", tuple_format)->check(CLI::IsMember({"tsv", "json"}));
  mexp->add_option("--out", cfg.out, "Output file");
  mexp->add_option("--seed", cfg.seed);
  mexp->add_option("--retry-wait", cfg.retry_wait_ms);

  std::string map_path = "address.map", hints_path;
  int seconds = 0;
  bool v6_loopback = false;
  auto* serve = app.add_subcommand("mock-serve", "Serve a fixture on loopback sockets");
  serve->add_option("fixture", fixture)->required()->check(CLI::ExistingFile);
  serve->add_option("--address-map", map_path, "Where to write the address map");
  serve->add_option("--hints", hints_path, "Where to write root hints");
  serve->add_option("--seconds", seconds, "Stop after this long (0: until interrupted)");
  serve->add_flag("--v6-loopback", v6_loopback, "Bind ::1 instead of 127.0.0.1");

  std::uint64_t rseed = 1;
  std::size_t size = 50;
  double rate = 0.1;
  std::string truth_path;
  auto* rnd = app.add_subcommand("mock-random", "Generate a random fixture");
  rnd->add_option("fixture", fixture)->required();
  rnd->add_option("--seed", rseed);
  rnd->add_option("--size", size)->check(CLI::Range(1, 10000));
  rnd->add_option("--defect-rate", rate)->check(CLI::Range(0.0, 1.0));
  rnd->add_option("--truth", truth_path, "Ground truth TSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << '\n';
    return kError;
  }

  if (*check) return cmd_check(domain, cfg, out, err);
  if (*scan) return cmd_scan(list, cfg, out, err);
  if (*sim) return cmd_simulate(files, cfg, out, err);
  if (*mexp)
    return cmd_mock_export(fixture, mode, tuple_format == "json" ? TupleFormat::json : TupleFormat::tsv, cfg, out,
                           err);
  if (*serve) return cmd_mock_serve(fixture, map_path, hints_path, seconds, v6_loopback, out, err);
  if (*rnd) return cmd_mock_random(rseed, size, rate, fixture, truth_path, out, err);
  return kError;
}

}  // namespace v6ready::cli
