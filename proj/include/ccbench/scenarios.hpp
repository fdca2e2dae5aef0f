#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccbench/netsim.hpp"
#include "ccbench/types.hpp"

#include <json.hpp>

namespace ccb {

enum class Benchmark { kCcBench1Flat, kCcBench1Step, kCcBench2 };

std::string_view to_string(Benchmark b);
Benchmark parse_benchmark(std::string_view name);

/// Stand-in scheme id for the flow under test in a CC-Bench2 template.
inline constexpr std::string_view kSchemeUnderTest = "scheme-under-test";

inline constexpr Seconds kCcBench1Duration = 30.0;
inline constexpr Seconds kCcBench2Duration = 120.0;
inline constexpr Seconds kCcBench2TestStart = 10.0;
inline constexpr Seconds kStepPeriod = 7.0;

struct ScenarioFlow {
  std::string scheme;
  Seconds start_time = 0;

  bool operator==(const ScenarioFlow&) const = default;
};

/// One benchmark cell. `bw`, `step_multiplier` and `qs_bdp` describe how the
/// link was derived; `link` is authoritative.
struct Scenario {
  std::string id;
  Benchmark benchmark = Benchmark::kCcBench1Flat;
  LinkConfig link;
  Seconds duration = kCcBench1Duration;
  std::vector<ScenarioFlow> flows;

  BitsPerSecond bw = 0;
  std::optional<double> step_multiplier;
  std::optional<double> qs_bdp;

  /// Start of the scored window: the test flow's arrival for CC-Bench2.
  Seconds measurement_start() const;
  std::size_t test_flow_index() const;
  /// Throws if the scenario breaks its benchmark's shape.
  void validate() const;
};

/// Grid points. Defaults sample the published ranges geometrically.
struct GridSpec {
  std::vector<double> bw_mbps = {12, 24, 48, 96, 192};
  std::vector<double> min_rtt_ms = {10, 20, 40, 80, 160};
  std::vector<double> qs_bdp = {0.5, 1, 2, 4, 8, 16};
  std::vector<double> step_bw1_mbps = {12, 24, 48, 96};
  std::vector<double> step_m = {0.25, 0.5, 2, 4};

  static GridSpec ccbench1();
  static GridSpec ccbench2();
};

double bdp_bytes(BitsPerSecond bw, Seconds min_rtt);

/// BW1 on [0, period), m*BW1 on [period, 2*period), ... until `duration`.
BandwidthTrace step_trace(BitsPerSecond bw1, double m, Seconds period,
                          Seconds duration);

std::vector<Scenario> build_ccbench1_flat(const GridSpec& grid = GridSpec::ccbench1());
std::vector<Scenario> build_ccbench1_step(const GridSpec& grid = GridSpec::ccbench1());
/// `scheme_under_test` may be kSchemeUnderTest to get the template grid.
std::vector<Scenario> build_ccbench2(std::string_view scheme_under_test,
                                     const GridSpec& grid = GridSpec::ccbench2());
std::vector<Scenario> build_benchmark(Benchmark b, const GridSpec& grid);

/// Single-flow flat scenario with an explicit buffer, for sweeps.
Scenario make_flat_scenario(BitsPerSecond bw, Seconds min_rtt, Bytes queue,
                            Seconds duration = kCcBench1Duration);

/// Copy of `s` with the placeholder flow bound to `scheme`.
Scenario bind_scheme(const Scenario& s, std::string_view scheme);

// Manifest (de)serialization. Every link parameter is written explicitly.
nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json manifest_to_json(const std::vector<Scenario>& scenarios);
std::vector<Scenario> manifest_from_json(const nlohmann::json& j);

}  // namespace ccb
