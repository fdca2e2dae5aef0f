#include "ccbench/scenarios.hpp"

#include <cmath>
#include <cstdio>

#include "ccbench/cc.hpp"

namespace ccb {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

Bytes queue_for(double qs_bdp, BitsPerSecond bw, Seconds min_rtt) {
  return std::max<Bytes>(kMss, std::llround(qs_bdp * bdp_bytes(bw, min_rtt)));
}

Scenario single_flow(Benchmark b, std::string id, BandwidthTrace trace,
                     Seconds min_rtt, Bytes queue) {
  Scenario s;
  s.id = std::move(id);
  s.benchmark = b;
  s.link = LinkConfig{std::move(trace), min_rtt, queue};
  s.duration = kCcBench1Duration;
  s.flows = {ScenarioFlow{std::string(kSchemeUnderTest), 0.0}};
  return s;
}

}  // namespace

std::string_view to_string(Benchmark b) {
  switch (b) {
    case Benchmark::kCcBench1Flat:
      return "ccbench1_flat";
    case Benchmark::kCcBench1Step:
      return "ccbench1_step";
    case Benchmark::kCcBench2:
      return "ccbench2";
  }
  return "?";
}

Benchmark parse_benchmark(std::string_view name) {
  if (name == "ccbench1_flat") return Benchmark::kCcBench1Flat;
  if (name == "ccbench1_step") return Benchmark::kCcBench1Step;
  if (name == "ccbench2") return Benchmark::kCcBench2;
  throw Error(ErrorCode::kConfig,
              "unknown benchmark '" + std::string(name) + "'");
}

Seconds Scenario::measurement_start() const {
  return flows.empty() ? 0.0 : flows[test_flow_index()].start_time;
}

std::size_t Scenario::test_flow_index() const {
  return benchmark == Benchmark::kCcBench2 ? 1 : 0;
}

void Scenario::validate() const {
  link.validate();
  if (id.empty()) throw invalid_argument("scenario id is empty");
  if (std::abs(link.trace.horizon() - duration) > 1e-9)
    throw invalid_argument(id + ": trace horizon differs from duration");
  if (benchmark == Benchmark::kCcBench2) {
    if (flows.size() != 2)
      throw invalid_argument(id + ": ccbench2 scenarios carry two flows");
    if (flows[0].scheme != "cubic")
      throw invalid_argument(id + ": ccbench2 incumbent flow must be cubic");
    if (!(flows[0].start_time < flows[1].start_time))
      throw invalid_argument(id + ": cubic must start before the test flow");
    if (duration != kCcBench2Duration)
      throw invalid_argument(id + ": ccbench2 duration must be 120 s");
  } else {
    if (flows.size() != 1)
      throw invalid_argument(id + ": ccbench1 scenarios carry one flow");
    if (duration != kCcBench1Duration)
      throw invalid_argument(id + ": ccbench1 duration must be 30 s");
  }
  for (const auto& f : flows) {
    if (f.scheme != kSchemeUnderTest && !is_known_scheme(f.scheme))
      throw Error(ErrorCode::kUnknownScheme,
                  id + ": unknown scheme '" + f.scheme + "'");
    if (f.start_time < 0 || f.start_time >= duration)
      throw invalid_argument(id + ": flow start outside the run");
  }
}

GridSpec GridSpec::ccbench1() { return GridSpec{}; }

GridSpec GridSpec::ccbench2() {
  GridSpec g;
  g.qs_bdp = {1, 2, 4, 8, 16};
  return g;
}

double bdp_bytes(BitsPerSecond bw, Seconds min_rtt) {
  if (!(bw > 0) || !(min_rtt > 0))
    throw invalid_argument("bdp needs positive bandwidth and min_rtt");
  return bw * min_rtt / 8.0;
}

BandwidthTrace step_trace(BitsPerSecond bw1, double m, Seconds period,
                          Seconds duration) {
  std::vector<RateSegment> segments;
  for (int k = 0; k * period < duration; ++k)
    segments.push_back({k * period, k % 2 == 0 ? bw1 : m * bw1});
  return BandwidthTrace(std::move(segments), duration);
}

std::vector<Scenario> build_ccbench1_flat(const GridSpec& grid) {
  std::vector<Scenario> out;
  for (double bw : grid.bw_mbps)
    for (double rtt : grid.min_rtt_ms)
      for (double qs : grid.qs_bdp) {
        const BitsPerSecond rate = bw * kMbps;
        const Seconds min_rtt = rtt * kMs;
        Scenario s = single_flow(
            Benchmark::kCcBench1Flat,
            "flat_bw" + num(bw) + "_rtt" + num(rtt) + "_qs" + num(qs),
            BandwidthTrace::flat(rate, kCcBench1Duration), min_rtt,
            queue_for(qs, rate, min_rtt));
        s.bw = rate;
        s.qs_bdp = qs;
        out.push_back(std::move(s));
      }
  return out;
}

std::vector<Scenario> build_ccbench1_step(const GridSpec& grid) {
  std::vector<Scenario> out;
  for (double bw1 : grid.step_bw1_mbps)
    for (double m : grid.step_m) {
      if (m * bw1 > kMaxTraceRate / kMbps) continue;
      for (double rtt : grid.min_rtt_ms)
        for (double qs : grid.qs_bdp) {
          const BitsPerSecond rate = bw1 * kMbps;
          const Seconds min_rtt = rtt * kMs;
          Scenario s = single_flow(
              Benchmark::kCcBench1Step,
              "step_bw" + num(bw1) + "_m" + num(m) + "_rtt" + num(rtt) +
                  "_qs" + num(qs),
              step_trace(rate, m, kStepPeriod, kCcBench1Duration), min_rtt,
              queue_for(qs, rate, min_rtt));
          s.bw = rate;
          s.step_multiplier = m;
          s.qs_bdp = qs;
          out.push_back(std::move(s));
        }
    }
  return out;
}

std::vector<Scenario> build_ccbench2(std::string_view scheme_under_test,
                                     const GridSpec& grid) {
  if (scheme_under_test != kSchemeUnderTest &&
      !is_known_scheme(scheme_under_test))
    throw Error(ErrorCode::kUnknownScheme,
                "unknown scheme '" + std::string(scheme_under_test) + "'");
  std::vector<Scenario> out;
  for (double bw : grid.bw_mbps)
    for (double rtt : grid.min_rtt_ms)
      for (double qs : grid.qs_bdp) {
        const BitsPerSecond rate = bw * kMbps;
        const Seconds min_rtt = rtt * kMs;
        Scenario s;
        s.id = "cc2_bw" + num(bw) + "_rtt" + num(rtt) + "_qs" + num(qs);
        s.benchmark = Benchmark::kCcBench2;
        s.link = LinkConfig{BandwidthTrace::flat(rate, kCcBench2Duration),
                            min_rtt, queue_for(qs, rate, min_rtt)};
        s.duration = kCcBench2Duration;
        s.flows = {ScenarioFlow{"cubic", 0.0},
                   ScenarioFlow{std::string(scheme_under_test),
                                kCcBench2TestStart}};
        s.bw = rate;
        s.qs_bdp = qs;
        out.push_back(std::move(s));
      }
  return out;
}

std::vector<Scenario> build_benchmark(Benchmark b, const GridSpec& grid) {
  switch (b) {
    case Benchmark::kCcBench1Flat:
      return build_ccbench1_flat(grid);
    case Benchmark::kCcBench1Step:
      return build_ccbench1_step(grid);
    case Benchmark::kCcBench2:
      return build_ccbench2(kSchemeUnderTest, grid);
  }
  return {};
}

Scenario make_flat_scenario(BitsPerSecond bw, Seconds min_rtt, Bytes queue,
                            Seconds duration) {
  Scenario s = single_flow(Benchmark::kCcBench1Flat,
                           "flat_bw" + num(bw / kMbps) + "_rtt" +
                               num(min_rtt / kMs) + "_q" +
                               std::to_string(queue) + "B",
                           BandwidthTrace::flat(bw, duration), min_rtt, queue);
  s.duration = duration;
  s.bw = bw;
  return s;
}

Scenario bind_scheme(const Scenario& s, std::string_view scheme) {
  if (!is_known_scheme(scheme))
    throw Error(ErrorCode::kUnknownScheme,
                "unknown scheme '" + std::string(scheme) + "'");
  Scenario out = s;
  for (auto& f : out.flows)
    if (f.scheme == kSchemeUnderTest) f.scheme = std::string(scheme);
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& seg : s.link.trace.segments())
    segments.push_back({{"start_s", seg.start}, {"rate_bps", seg.rate}});
  nlohmann::json flows = nlohmann::json::array();
  for (const auto& f : s.flows)
    flows.push_back({{"scheme", f.scheme}, {"start_s", f.start_time}});
  nlohmann::json j = {
      {"id", s.id},
      {"benchmark", std::string(to_string(s.benchmark))},
      {"duration_s", s.duration},
      {"min_rtt_s", s.link.min_rtt},
      {"queue_bytes", s.link.queue_capacity},
      {"trace",
       {{"horizon_s", s.link.trace.horizon()}, {"segments", segments}}},
      {"flows", flows},
      {"bw_bps", s.bw},
  };
  if (s.step_multiplier) j["step_multiplier"] = *s.step_multiplier;
  if (s.qs_bdp) j["qs_bdp"] = *s.qs_bdp;
  return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    Scenario s;
    s.id = j.at("id").get<std::string>();
    s.benchmark = parse_benchmark(j.at("benchmark").get<std::string>());
    s.duration = j.at("duration_s").get<double>();
    std::vector<RateSegment> segments;
    for (const auto& seg : j.at("trace").at("segments"))
      segments.push_back(
          {seg.at("start_s").get<double>(), seg.at("rate_bps").get<double>()});
    s.link = LinkConfig{
        BandwidthTrace(std::move(segments),
                       j.at("trace").at("horizon_s").get<double>()),
        j.at("min_rtt_s").get<double>(), j.at("queue_bytes").get<Bytes>()};
    for (const auto& f : j.at("flows"))
      s.flows.push_back(
          {f.at("scheme").get<std::string>(), f.at("start_s").get<double>()});
    s.bw = j.value("bw_bps", s.link.trace.rate_at(0));
    if (j.contains("step_multiplier"))
      s.step_multiplier = j["step_multiplier"].get<double>();
    if (j.contains("qs_bdp")) s.qs_bdp = j["qs_bdp"].get<double>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig,
                std::string("malformed scenario in manifest: ") + e.what());
  }
}

nlohmann::json manifest_to_json(const std::vector<Scenario>& scenarios) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : scenarios) list.push_back(to_json(s));
  return {{"format", "ccbench-manifest"},
          {"version", 1},
          {"step_cycle", "bw1-first"},
          {"scenarios", list}};
}

std::vector<Scenario> manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("scenarios"))
    throw Error(ErrorCode::kConfig, "manifest has no 'scenarios' list");
  std::vector<Scenario> out;
  for (const auto& s : j.at("scenarios")) out.push_back(scenario_from_json(s));
  return out;
}

}  // namespace ccb
