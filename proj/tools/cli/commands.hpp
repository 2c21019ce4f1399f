#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "v6ready/mock_net.hpp"
#include "v6ready/query.hpp"
#include "v6ready/resolver.hpp"

namespace v6ready::cli {

enum ExitCode : int { kResolvable = 0, kNotResolvable = 1, kError = 2 };

enum class OutputFormat { text, structured };

struct Config {
  std::string roots;        // root hints file; empty: built-in (or the mock's)
  ProtocolFilter filter = ProtocolFilter::both;
  int timeout_ms = 3000;
  int tcp_timeout_ms = 10000;
  int retries = 4;
  int retry_wait_ms = 20000;
  int concurrency = 8;
  std::string journal;
  std::string out;          // report file (scan), output directory (simulate)
  OutputFormat format = OutputFormat::text;
  std::string psl;
  std::string tlds;
  std::string toplist;
  std::string operators;
  std::string month;
  std::uint64_t seed = 1;
  std::string address_map;  // logical -> real endpoint remapping for sockets
  std::string mock;         // fixture served in-process instead of the network
  bool probe_liveness = true;
  bool enrich = true;

  QueryPolicy policy() const;
  ResolverOptions resolver_options() const;
};

/// Where queries go. Tests pass a Universe; otherwise built from the config.
struct Network {
  Transport* transport = nullptr;
  RootHints hints;
};

/// Single-domain check: delegation chain over both protocols, classification,
/// NS liveness. 0 iff IPv6-resolvable, 1 if not, 2 on operational error.
int cmd_check(const std::string& domain, const Config& cfg, std::ostream& out, std::ostream& err,
              const Network* net = nullptr);

struct ScanEntry {
  std::string domain;
  std::optional<std::uint64_t> rank;
};
/// One domain per line, or "rank,domain" CSV; blank lines and '#' comments skipped.
std::vector<ScanEntry> parse_domain_list(const std::string& text);

/// Bulk check with a completed-set journal. Domains already in the journal are
/// not queried again. Per-domain failures are recorded, never fatal.
int cmd_scan(const std::string& list_path, const Config& cfg, std::ostream& out, std::ostream& err,
             const Network* net = nullptr);

/// Passive pipeline plus analytics for one snapshot of tuple files.
int cmd_simulate(const std::vector<std::string>& tuple_files, const Config& cfg, std::ostream& out,
                 std::ostream& err);

/// Crawls a fixture universe (or dumps its model) and writes the tuples.
int cmd_mock_export(const std::string& fixture, const std::string& mode, TupleFormat fmt, const Config& cfg,
                    std::ostream& out, std::ostream& err);

/// Serves a fixture on loopback sockets until `seconds` elapse (0: until signalled).
int cmd_mock_serve(const std::string& fixture, const std::string& map_path, const std::string& hints_path,
                   int seconds, bool v6_loopback, std::ostream& out, std::ostream& err);

/// Writes a random fixture and its ground truth.
int cmd_mock_random(std::uint64_t seed, std::size_t size, double defect_rate, const std::string& fixture_path,
                    const std::string& truth_path, std::ostream& out, std::ostream& err);

/// Full command line, including subcommand dispatch.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace v6ready::cli
