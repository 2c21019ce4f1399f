#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "v6ready/classifier.hpp"
#include "v6ready/zone_data.hpp"

namespace v6ready {

/// One aggregated observation: <rrname, rrtype, bailiwick, rdata> seen `count`
/// times between time_first and time_last.
struct PassiveTuple {
  std::uint64_t count = 1;
  std::int64_t time_first = 0;
  std::int64_t time_last = 0;
  DomainName rrname;
  RRType rrtype;
  DomainName bailiwick;
  std::vector<std::string> rdata;

  friend bool operator==(const PassiveTuple&, const PassiveTuple&) = default;
};

class MalformedTuple : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TupleFormat { tsv, json };

/// Seven tab-separated fields; any further fields are additional rdata values.
PassiveTuple parse_tuple_tsv(std::string_view line);
/// One JSON object with keys count, time_first, time_last, rrname, rrtype,
/// bailiwick, rdata (string or array of strings).
PassiveTuple parse_tuple_json(std::string_view line);
std::string format_tuple(const PassiveTuple& t, TupleFormat fmt);

struct ReadStats {
  std::size_t lines = 0;
  std::size_t tuples = 0;
  std::size_t malformed = 0;
};

/// Streams tuples from text. Blank lines and '#' comments are skipped; the format
/// is chosen from the first data line ('{' means JSON). Malformed lines are
/// counted and skipped.
ReadStats read_tuples(std::istream& in, const std::function<void(PassiveTuple&&)>& sink);
/// Same, from a file; gzip-compressed files are read transparently.
ReadStats read_tuple_file(const std::string& path, const std::function<void(PassiveTuple&&)>& sink);

struct IngestStats {
  std::size_t ns_records = 0;
  std::size_t address_records = 0;
  std::size_t cname_ignored = 0;
  std::size_t other_ignored = 0;
  std::size_t untrusted = 0;
  std::size_t malformed = 0;  // tuples whose rdata did not parse for their type
};

/// Builds per-zone record sets from NS tuples and per-name address records from
/// A/AAAA tuples, grouped by bailiwick.
class Ingestor {
 public:
  void add(const PassiveTuple& t);
  /// Finalizes and hands over the dataset.
  ZoneDataset finish();
  const IngestStats& stats() const noexcept { return stats_; }

 private:
  ZoneDataset data_;
  IngestStats stats_;
};

ZoneDataset ingest(const std::vector<PassiveTuple>& tuples, IngestStats* stats = nullptr);

struct ZoneFlags {
  bool glue_res = false;
  bool zone_res = false;
  bool res = false;

  friend bool operator==(const ZoneFlags&, const ZoneFlags&) = default;
};

struct ZoneResolution {
  std::optional<DomainName> parent;  // unset: parent never observed
  std::array<ZoneFlags, 2> flags;    // indexed by IpFamily

  bool unknown_parent() const noexcept { return !parent; }
  const ZoneFlags& of(IpFamily f) const { return flags[static_cast<std::size_t>(f)]; }
  ZoneFlags& of(IpFamily f) { return flags[static_cast<std::size_t>(f)]; }
};

struct ResolutionTable {
  std::map<DomainName, ZoneResolution> zones;  // root not stored
  std::map<DomainName, std::array<bool, 2>> ns_res;
  std::array<int, 2> passes{0, 0};

  /// The root always resolves; unknown zones never do.
  bool resolves(const DomainName& zone, IpFamily f) const;
};

class IterationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Resolvability fixed point over the dataset, computed independently per
/// protocol. Every pass reads only the previous pass's table; iteration stops
/// when the resolved count no longer changes or every zone resolved.
ResolutionTable fixed_point(const ZoneDataset& data);

/// Classifies every zone with a known parent against the final table.
std::map<DomainName, ResolutionStatus> classify_all(const ZoneDataset& data,
                                                    const ResolutionTable& table);

struct ZoneVerdict {
  DomainName zone;
  std::optional<ResolutionStatus> status;  // unset: unknown parent
  ZoneResolution flags;
  NameSet ns;
};

std::vector<ZoneVerdict> build_verdicts(const ZoneDataset& data, const ResolutionTable& table);

struct SnapshotStats {
  std::string month;
  std::size_t zones = 0;  // excludes the root and unknown-parent zones
  std::size_t dual = 0;
  std::size_t v4_only = 0;
  std::size_t v6_only = 0;
  std::size_t none = 0;
  std::size_t unknown_parent = 0;
  std::size_t intent_v6 = 0;
  std::map<ResolutionState, std::size_t> intent_by_state;
  FailureBreakdown breakdown;

  double percent(ResolutionState s) const;
  /// Share of a state among intent_v6 zones.
  double intent_percent(ResolutionState s) const;
  std::size_t count(ResolutionState s) const;
};

SnapshotStats snapshot_stats(const std::vector<ZoneVerdict>& verdicts, std::string month = {});

/// "#v6ready-verdicts v1" followed by one tab-separated row per zone.
void write_verdicts(std::ostream& out, const std::vector<ZoneVerdict>& verdicts);
std::vector<ZoneVerdict> read_verdicts(std::istream& in);
std::string snapshot_json(const SnapshotStats& stats);

}  // namespace v6ready
