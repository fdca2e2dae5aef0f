#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ccbench/netsim.hpp"
#include "ccbench/scenarios.hpp"

namespace ccb {

inline constexpr int kIntervalsPerRun = 4;
inline constexpr double kDefaultAlpha = 2.0;
/// Schemes within this fraction of the best score share the win.
inline constexpr double kWinMargin = 0.10;
/// Lower-better cells whose best score is exactly 0 accept anything within
/// this fraction of the fair share.
inline constexpr double kZeroBestEpsilon = 0.01;

enum class ScoreKind { kPower, kFriendliness };
enum class Direction { kHigherBetter, kLowerBetter };

std::string_view to_string(ScoreKind k);
std::string_view to_string(Direction d);
Direction direction_of(ScoreKind k);
ScoreKind parse_score_kind(std::string_view s);

/// r^alpha / d with r in Mbps and d in ms.
double power_score(double r_mbps, double d_ms, double alpha = kDefaultAlpha);
/// |f - r|, both in Mbps.
double friendliness_score(double f_mbps, double r_mbps);

/// Raw per-interval aggregates of one flow. Scores are derived from these, so
/// storing them is enough to rescore with a different alpha.
struct IntervalMeasurement {
  std::uint32_t flow_id = 0;
  int interval_index = 0;
  Seconds t_start = 0;
  Seconds t_end = 0;
  Bytes bytes_acked = 0;
  std::uint64_t ack_count = 0;
  Seconds rtt_sum = 0;
  std::optional<BitsPerSecond> fair_share;  // CC-Bench2 only

  bool has_data() const { return ack_count > 0; }
  BitsPerSecond rate() const;
  Seconds mean_rtt() const;
};

/// Splits the scenario's measurement window into four equal intervals and
/// aggregates the acks of `trace` falling into each. The last interval is
/// closed on the right.
std::vector<IntervalMeasurement> interval_measurements(const FlowTrace& trace,
                                                       const Scenario& scenario);

struct ScoreRecord {
  std::string scenario_id;
  std::string scheme;
  int interval = 0;
  ScoreKind kind = ScoreKind::kPower;
  std::optional<double> value;  // empty: no acks in the interval
  double r_mbps = 0;
  std::optional<double> d_ms;
  std::optional<double> f_mbps;
  bool is_winner = false;

  Direction direction() const { return direction_of(kind); }
};

ScoreRecord score_interval(const IntervalMeasurement& m, ScoreKind kind,
                           double alpha, std::string scenario_id,
                           std::string scheme);

/// Winner set of one (scenario, interval, kind) cell. No-data records never
/// win. Throws if the records do not share a cell.
std::set<std::string> winners(std::span<const ScoreRecord> records);

/// Percentage of cells whose winner set contains `scheme`.
double winning_rate(std::span<const std::set<std::string>> cells,
                    const std::string& scheme);

struct RankEntry {
  std::string scheme;
  double winning_rate = 0;

  bool operator==(const RankEntry&) const = default;
};
using Ranking = std::vector<RankEntry>;

/// Nonincreasing by rate; ties broken by scheme id.
Ranking rank(const std::map<std::string, double>& rates);

}  // namespace ccb
