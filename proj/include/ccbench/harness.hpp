#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccbench/scenarios.hpp"
#include "ccbench/scoring.hpp"

#include <json.hpp>

namespace ccb {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Schemes every full benchmark run covers by default.
const std::vector<std::string>& required_schemes();

/// Expands a selector ("ccbench1", "ccbench1_flat", "ccbench1_step",
/// "ccbench2") into benchmarks. Throws kConfig for anything else.
std::vector<Benchmark> expand_selector(std::string_view selector);

struct GridOverrides {
  std::optional<std::vector<double>> bw_mbps;
  std::optional<std::vector<double>> min_rtt_ms;
  std::optional<std::vector<double>> qs_bdp;
  std::optional<std::vector<double>> step_bw1_mbps;
  std::optional<std::vector<double>> step_m;

  bool empty() const;
  GridSpec apply(GridSpec base) const;
};

struct RunConfig {
  std::string benchmark = "ccbench1";
  std::vector<std::string> schemes = required_schemes();
  GridOverrides grid;
  double alpha = kDefaultAlpha;
  int parallel = 1;
  /// When set, the scenario list comes from this manifest instead of the grid.
  std::string manifest_path;

  /// Throws kUnknownScheme or kConfig.
  void validate() const;
  nlohmann::json to_json() const;
  /// Inverse of to_json plus an optional "parallel" key. Unknown keys are
  /// rejected and the result is validated.
  static RunConfig from_json(const nlohmann::json& j);
};

/// Whole-run summary of one flow in one cell.
struct FlowSummary {
  std::string scenario_id;
  std::string scheme;       // scheme under test in this cell
  std::uint32_t flow_id = 0;
  std::string flow_scheme;  // scheme driving this flow
  Seconds start_time = 0;
  Bytes bytes_sent = 0;
  Bytes bytes_acked = 0;
  std::uint64_t ack_count = 0;
  Seconds mean_rtt = 0;
  std::uint64_t drops = 0;
  std::uint64_t loss_events = 0;
  std::uint64_t timeouts = 0;
  bool stalled = false;
  Seconds stalled_at = 0;
};

struct IntervalRow {
  std::string scenario_id;
  Benchmark benchmark = Benchmark::kCcBench1Flat;
  std::string scheme;
  IntervalMeasurement m;
};

struct FailureRow {
  std::string scenario_id;
  Benchmark benchmark = Benchmark::kCcBench1Flat;
  std::string scheme;
  int interval = 0;
  std::string reason;
};

/// Winner set of one (scenario, interval) cell.
struct WinnerCell {
  std::string scenario_id;
  int interval = 0;
  ScoreKind kind = ScoreKind::kPower;
  std::set<std::string> winners;
};

struct ResultsBundle {
  std::string tool_version = std::string(kToolVersion);
  std::string config_hash;
  std::string timestamp;
  nlohmann::json config;
  double alpha = kDefaultAlpha;
  std::vector<std::string> schemes;
  std::vector<Scenario> scenarios;

  std::vector<FlowSummary> flows;
  std::vector<IntervalRow> intervals;
  std::vector<FailureRow> failures;

  // Derived from `intervals` by rescore().
  std::vector<ScoreRecord> scores;
  std::vector<WinnerCell> winner_cells;
  /// Keyed by "ccbench1" (power) and "ccbench2" (friendliness).
  std::map<std::string, Ranking> rankings;

  bool partial() const { return !failures.empty(); }
};

/// Runs `scenarios` x `schemes`. Cell failures are logged in the bundle,
/// never thrown.
ResultsBundle run_scenarios(const std::vector<Scenario>& scenarios,
                            const std::vector<std::string>& schemes,
                            double alpha, int parallel,
                            const nlohmann::json& config);

/// The scenario list a run would execute, with the test flow unbound.
std::vector<Scenario> plan(const RunConfig& config);

ResultsBundle run(const RunConfig& config);

/// Recomputes scores, winners and rankings from the stored intervals.
void rescore(ResultsBundle& bundle, double alpha);

struct SweepConfig {
  enum class Axis { kBuffer, kMinRtt };
  Axis axis = Axis::kBuffer;
  double bw_mbps = 48;
  double min_rtt_ms = 40;                             // buffer axis
  std::vector<double> buffers_kb = {64, 128, 256, 512, 1024};
  double qs_bdp = 5;                                  // min-RTT axis
  std::vector<double> min_rtts_ms = {20, 40, 60, 80, 120};
  std::vector<std::string> schemes = {"cubic", "ledbat"};
  double alpha = kDefaultAlpha;
  int parallel = 1;
  Seconds duration = kCcBench1Duration;

  nlohmann::json to_json() const;
  static SweepConfig from_json(const nlohmann::json& j);
};

/// Single-flow flat runs along one axis, for score-vs-parameter curves.
ResultsBundle sweep(const SweepConfig& config);

struct SeriesPoint {
  std::string series;  // e.g. "ccbench1_flat:bw48:rtt40"
  std::string axis;    // "buffer_kb" or "min_rtt_ms"
  double x = 0;
  std::string scheme;
  ScoreKind kind = ScoreKind::kPower;
  std::optional<double> score;
  double r_mbps = 0;
  std::optional<double> d_ms;
};

struct Report {
  std::string ranking_csv;
  std::string series_csv;
  std::vector<SeriesPoint> series;
};

/// Ranking table plus every score curve with at least two points. Throws
/// kNoData on an empty bundle.
Report report(const ResultsBundle& bundle);

/// Writes the bundle directory. Only bundle.json carries the timestamp.
void write_bundle(const ResultsBundle& bundle, const std::string& dir);
/// Reads a bundle directory and rescores it with its stored alpha.
ResultsBundle load_bundle(const std::string& dir);

std::string results_csv(const ResultsBundle& bundle);
std::string ranking_csv(const ResultsBundle& bundle);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

}  // namespace ccb
