#include "ccbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace ccb {

namespace {

constexpr std::string_view kRepetitionNote =
    "one deterministic simulation per cell; no repetitions are averaged";

std::string fmt(double v, int precision) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string exact(double v) { return fmt(v, 17); }
std::string shown(double v) { return fmt(v, 9); }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorCode::kConfig,
                "csv column '" + std::string(name) + "' missing");
  }
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + p.string());
  out << data;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + p.string());
}

CsvTable read_csv(const std::filesystem::path& p) {
  std::istringstream in(read_file(p));
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = parse_csv_line(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error(ErrorCode::kConfig, p.string() + ": ragged row");
    t.rows.push_back(std::move(fields));
  }
  if (first) throw Error(ErrorCode::kConfig, p.string() + ": no header");
  return t;
}

double to_double(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno == ERANGE)
    throw Error(ErrorCode::kConfig, "bad number '" + s + "'");
  return v;
}

long long to_int(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || errno == ERANGE)
    throw Error(ErrorCode::kConfig, "bad integer '" + s + "'");
  return v;
}

nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, what + ": " + e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string ranking_group(ScoreKind kind) {
  return kind == ScoreKind::kPower ? "ccbench1" : "ccbench2";
}

ScoreKind kind_for(Benchmark b) {
  return b == Benchmark::kCcBench2 ? ScoreKind::kFriendliness
                                   : ScoreKind::kPower;
}

void check_schemes(const std::vector<std::string>& schemes) {
  if (schemes.empty()) throw Error(ErrorCode::kConfig, "scheme list is empty");
  std::unordered_set<std::string> seen;
  for (const auto& s : schemes) {
    if (!is_known_scheme(s))
      throw Error(ErrorCode::kUnknownScheme, "unknown scheme '" + s + "'");
    if (!seen.insert(s).second)
      throw Error(ErrorCode::kConfig, "scheme '" + s + "' listed twice");
  }
}

struct CellOutcome {
  std::vector<IntervalMeasurement> intervals;
  std::vector<FlowSummary> flows;
  std::optional<Seconds> stalled_at;
  std::optional<std::string> error;
};

CellOutcome run_cell(const Scenario& scenario, const std::string& scheme) {
  CellOutcome out;
  try {
    const Scenario bound = bind_scheme(scenario, scheme);
    std::vector<FlowSetup> setups;
    for (const auto& f : bound.flows)
      setups.push_back({make_scheme(f.scheme), f.start_time, bound.duration});
    const SimResult sim = simulate(bound.link, std::move(setups));

    for (std::size_t i = 0; i < sim.flows.size(); ++i) {
      const FlowTrace& t = sim.flows[i];
      FlowSummary fs;
      fs.scenario_id = bound.id;
      fs.scheme = scheme;
      fs.flow_id = t.flow_id;
      fs.flow_scheme = bound.flows[i].scheme;
      fs.start_time = t.start_time;
      fs.bytes_sent = t.bytes_sent;
      fs.bytes_acked = t.bytes_acked();
      fs.ack_count = t.ack_records.size();
      double rtt_sum = 0;
      for (const auto& a : t.ack_records) rtt_sum += a.rtt_sample;
      fs.mean_rtt = fs.ack_count ? rtt_sum / fs.ack_count : 0.0;
      fs.drops = t.drop_count;
      fs.loss_events = t.loss_events;
      fs.timeouts = t.timeouts;
      fs.stalled = t.stalled;
      fs.stalled_at = t.stalled_at;
      out.flows.push_back(std::move(fs));
    }
    const FlowTrace& test = sim.flows.at(bound.test_flow_index());
    out.intervals = interval_measurements(test, bound);
    if (test.stalled) out.stalled_at = test.stalled_at;
  } catch (const std::exception& e) {
    out = CellOutcome{};
    out.error = e.what();
  }
  return out;
}

IntervalMeasurement aggregate(const std::vector<const IntervalMeasurement*>& ms) {
  IntervalMeasurement agg;
  agg.t_start = ms.front()->t_start;
  agg.t_end = ms.front()->t_end;
  double f_weighted = 0;
  bool has_f = false;
  for (const auto* m : ms) {
    agg.t_start = std::min(agg.t_start, m->t_start);
    agg.t_end = std::max(agg.t_end, m->t_end);
    agg.bytes_acked += m->bytes_acked;
    agg.ack_count += m->ack_count;
    agg.rtt_sum += m->rtt_sum;
    if (m->fair_share) {
      has_f = true;
      f_weighted += *m->fair_share * (m->t_end - m->t_start);
    }
  }
  // Rate over the covered time only, so a failed interval does not count as
  // silence.
  double covered = 0;
  for (const auto* m : ms) covered += m->t_end - m->t_start;
  agg.t_end = agg.t_start + covered;
  if (has_f) agg.fair_share = f_weighted / covered;
  return agg;
}

}  // namespace

const std::vector<std::string>& required_schemes() {
  static const std::vector<std::string> kSchemes = {"newreno", "cubic", "vegas",
                                                    "ledbat", "bbr_lite"};
  return kSchemes;
}

std::vector<Benchmark> expand_selector(std::string_view selector) {
  if (selector == "ccbench1")
    return {Benchmark::kCcBench1Flat, Benchmark::kCcBench1Step};
  return {parse_benchmark(selector)};
}

bool GridOverrides::empty() const {
  return !bw_mbps && !min_rtt_ms && !qs_bdp && !step_bw1_mbps && !step_m;
}

GridSpec GridOverrides::apply(GridSpec base) const {
  auto set = [](std::vector<double>& dst,
                const std::optional<std::vector<double>>& src,
                const char* name) {
    if (!src) return;
    if (src->empty())
      throw Error(ErrorCode::kConfig, std::string(name) + " override is empty");
    for (double v : *src)
      if (!(v > 0) || !std::isfinite(v))
        throw Error(ErrorCode::kConfig,
                    std::string(name) + " override must be positive");
    dst = *src;
  };
  set(base.bw_mbps, bw_mbps, "bw");
  set(base.min_rtt_ms, min_rtt_ms, "min-rtt");
  set(base.qs_bdp, qs_bdp, "qs");
  set(base.step_bw1_mbps, step_bw1_mbps, "step-bw1");
  set(base.step_m, step_m, "step-m");
  return base;
}

void RunConfig::validate() const {
  expand_selector(benchmark);
  check_schemes(schemes);
  grid.apply(GridSpec{});
  if (parallel < 1) throw Error(ErrorCode::kConfig, "parallel must be >= 1");
  if (!(alpha > 0) || !std::isfinite(alpha))
    throw Error(ErrorCode::kConfig, "alpha must be > 0");
  if (!manifest_path.empty() && !grid.empty())
    throw Error(ErrorCode::kConfig,
                "a manifest pins the scenarios; grid overrides conflict");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json g = nlohmann::json::object();
  auto put = [&](const char* key, const std::optional<std::vector<double>>& v) {
    if (v) g[key] = *v;
  };
  put("bw_mbps", grid.bw_mbps);
  put("min_rtt_ms", grid.min_rtt_ms);
  put("qs_bdp", grid.qs_bdp);
  put("step_bw1_mbps", grid.step_bw1_mbps);
  put("step_m", grid.step_m);
  // Parallelism is left out: it never changes results.
  return {{"kind", "run"},
          {"benchmark", benchmark},
          {"schemes", schemes},
          {"grid", g},
          {"alpha", alpha},
          {"manifest", manifest_path}};
}

namespace {

void reject_unknown_keys(const nlohmann::json& j,
                         std::initializer_list<std::string_view> allowed,
                         const char* what) {
  if (!j.is_object())
    throw Error(ErrorCode::kConfig, std::string(what) + " must be an object");
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::kConfig,
                  std::string(what) + ": unknown key '" + key + "'");
}

template <typename F>
auto config_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string(what) + ": " + e.what());
  }
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  return config_guard("run config", [&] {
    reject_unknown_keys(j,
                        {"kind", "benchmark", "schemes", "grid", "alpha",
                         "parallel", "manifest"},
                        "run config");
    RunConfig c;
    c.benchmark = j.value("benchmark", c.benchmark);
    if (j.contains("schemes"))
      c.schemes = j["schemes"].get<std::vector<std::string>>();
    c.alpha = j.value("alpha", c.alpha);
    c.parallel = j.value("parallel", c.parallel);
    c.manifest_path = j.value("manifest", c.manifest_path);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      reject_unknown_keys(
          g, {"bw_mbps", "min_rtt_ms", "qs_bdp", "step_bw1_mbps", "step_m"},
          "grid");
      auto get = [&](const char* key, std::optional<std::vector<double>>& dst) {
        if (g.contains(key)) dst = g[key].get<std::vector<double>>();
      };
      get("bw_mbps", c.grid.bw_mbps);
      get("min_rtt_ms", c.grid.min_rtt_ms);
      get("qs_bdp", c.grid.qs_bdp);
      get("step_bw1_mbps", c.grid.step_bw1_mbps);
      get("step_m", c.grid.step_m);
    }
    c.validate();
    return c;
  });
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  return config_guard("sweep config", [&] {
    reject_unknown_keys(j,
                        {"kind", "axis", "bw_mbps", "min_rtt_ms", "buffers_kb",
                         "qs_bdp", "min_rtts_ms", "schemes", "alpha",
                         "parallel", "duration_s"},
                        "sweep config");
    SweepConfig c;
    const std::string axis = j.value("axis", std::string("buffer_kb"));
    if (axis == "buffer_kb")
      c.axis = Axis::kBuffer;
    else if (axis == "min_rtt_ms")
      c.axis = Axis::kMinRtt;
    else
      throw Error(ErrorCode::kConfig, "unknown sweep axis '" + axis + "'");
    if (c.axis == Axis::kMinRtt && !j.contains("schemes"))
      c.schemes = {"vegas", "bbr_lite"};
    c.bw_mbps = j.value("bw_mbps", c.bw_mbps);
    c.min_rtt_ms = j.value("min_rtt_ms", c.min_rtt_ms);
    if (j.contains("buffers_kb"))
      c.buffers_kb = j["buffers_kb"].get<std::vector<double>>();
    c.qs_bdp = j.value("qs_bdp", c.qs_bdp);
    if (j.contains("min_rtts_ms"))
      c.min_rtts_ms = j["min_rtts_ms"].get<std::vector<double>>();
    if (j.contains("schemes"))
      c.schemes = j["schemes"].get<std::vector<std::string>>();
    c.alpha = j.value("alpha", c.alpha);
    c.parallel = j.value("parallel", c.parallel);
    c.duration = j.value("duration_s", c.duration);
    return c;
  });
}

nlohmann::json SweepConfig::to_json() const {
  nlohmann::json j = {{"kind", "sweep"},
                      {"bw_mbps", bw_mbps},
                      {"schemes", schemes},
                      {"alpha", alpha},
                      {"duration_s", duration}};
  if (axis == Axis::kBuffer) {
    j["axis"] = "buffer_kb";
    j["min_rtt_ms"] = min_rtt_ms;
    j["buffers_kb"] = buffers_kb;
  } else {
    j["axis"] = "min_rtt_ms";
    j["qs_bdp"] = qs_bdp;
    j["min_rtts_ms"] = min_rtts_ms;
  }
  return j;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ResultsBundle run_scenarios(const std::vector<Scenario>& scenarios,
                            const std::vector<std::string>& schemes,
                            double alpha, int parallel,
                            const nlohmann::json& config) {
  check_schemes(schemes);
  if (parallel < 1) throw Error(ErrorCode::kConfig, "parallel must be >= 1");
  if (!(alpha > 0)) throw Error(ErrorCode::kConfig, "alpha must be > 0");
  if (scenarios.empty()) throw Error(ErrorCode::kConfig, "no scenarios to run");
  std::unordered_set<std::string> ids;
  for (const auto& s : scenarios) {
    if (!ids.insert(s.id).second)
      throw Error(ErrorCode::kConfig, "duplicate scenario id '" + s.id + "'");
    if (s.flows.size() <= s.test_flow_index() ||
        s.flows[s.test_flow_index()].scheme != kSchemeUnderTest)
      throw Error(ErrorCode::kConfig,
                  s.id + ": test flow must be the scheme-under-test slot");
  }

  ResultsBundle b;
  b.config = config;
  b.alpha = alpha;
  b.schemes = schemes;
  b.scenarios = scenarios;
  b.timestamp = utc_timestamp();
  b.config_hash =
      fnv1a_hex(config.dump() + "\n" + manifest_to_json(scenarios).dump());

  const std::size_t n = scenarios.size() * schemes.size();
  std::vector<CellOutcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;)
      outcomes[i] = run_cell(scenarios[i / schemes.size()],
                             schemes[i % schemes.size()]);
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t workers = std::min<std::size_t>(parallel, n);
    for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(worker);
    worker();
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Scenario& s = scenarios[i / schemes.size()];
    const std::string& scheme = schemes[i % schemes.size()];
    CellOutcome& o = outcomes[i];
    if (o.error) {
      for (int k = 0; k < kIntervalsPerRun; ++k)
        b.failures.push_back({s.id, s.benchmark, scheme, k, *o.error});
      continue;
    }
    for (auto& f : o.flows) b.flows.push_back(std::move(f));
    for (const auto& m : o.intervals) {
      if (o.stalled_at && m.t_end > *o.stalled_at) {
        b.failures.push_back({s.id, s.benchmark, scheme, m.interval_index,
                              "stalled at " + shown(*o.stalled_at) +
                                  " s: no ack for 10 s with data pending"});
        continue;
      }
      b.intervals.push_back({s.id, s.benchmark, scheme, m});
    }
  }
  rescore(b, alpha);
  return b;
}

std::vector<Scenario> plan(const RunConfig& config) {
  config.validate();
  const auto benches = expand_selector(config.benchmark);
  std::vector<Scenario> scenarios;
  if (!config.manifest_path.empty()) {
    const auto j = parse_json(read_file(config.manifest_path), "manifest");
    scenarios = manifest_from_json(j);
    for (const auto& s : scenarios)
      if (std::find(benches.begin(), benches.end(), s.benchmark) ==
          benches.end())
        throw Error(ErrorCode::kConfig,
                    "manifest scenario " + s.id + " is not part of " +
                        config.benchmark);
  } else {
    for (Benchmark bench : benches) {
      const GridSpec base = bench == Benchmark::kCcBench2 ? GridSpec::ccbench2()
                                                          : GridSpec::ccbench1();
      auto part = build_benchmark(bench, config.grid.apply(base));
      for (auto& s : part) scenarios.push_back(std::move(s));
    }
  }
  return scenarios;
}

ResultsBundle run(const RunConfig& config) {
  return run_scenarios(plan(config), config.schemes, config.alpha,
                       config.parallel, config.to_json());
}

void rescore(ResultsBundle& bundle, double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha))
    throw Error(ErrorCode::kConfig, "alpha must be > 0");
  bundle.alpha = alpha;
  if (bundle.config.is_object()) bundle.config["alpha"] = alpha;
  bundle.scores.clear();
  bundle.winner_cells.clear();
  bundle.rankings.clear();

  for (const auto& row : bundle.intervals)
    bundle.scores.push_back(score_interval(row.m, kind_for(row.benchmark),
                                           alpha, row.scenario_id, row.scheme));

  std::map<std::pair<std::string, int>, std::vector<std::size_t>> by_cell;
  std::vector<std::pair<std::string, int>> order;
  for (std::size_t i = 0; i < bundle.scores.size(); ++i) {
    const auto key =
        std::make_pair(bundle.scores[i].scenario_id, bundle.scores[i].interval);
    auto [it, inserted] = by_cell.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(i);
  }
  std::map<std::string, std::vector<std::set<std::string>>> cells_by_group;
  for (const auto& key : order) {
    const auto& idx = by_cell[key];
    std::vector<ScoreRecord> recs;
    for (std::size_t i : idx) recs.push_back(bundle.scores[i]);
    WinnerCell cell{key.first, key.second, recs.front().kind, winners(recs)};
    for (std::size_t i : idx)
      bundle.scores[i].is_winner = cell.winners.contains(bundle.scores[i].scheme);
    cells_by_group[ranking_group(cell.kind)].push_back(cell.winners);
    bundle.winner_cells.push_back(std::move(cell));
  }
  for (const auto& [group, cells] : cells_by_group) {
    std::map<std::string, double> rates;
    for (const auto& s : bundle.schemes) rates[s] = winning_rate(cells, s);
    bundle.rankings[group] = rank(rates);
  }
}

ResultsBundle sweep(const SweepConfig& config) {
  check_schemes(config.schemes);
  auto positive = [](double v) { return v > 0 && std::isfinite(v); };
  if (!positive(config.bw_mbps))
    throw Error(ErrorCode::kConfig, "sweep bandwidth must be positive");
  if (!positive(config.duration))
    throw Error(ErrorCode::kConfig, "sweep duration must be positive");
  const BitsPerSecond bw = config.bw_mbps * kMbps;

  std::vector<Scenario> scenarios;
  if (config.axis == SweepConfig::Axis::kBuffer) {
    if (config.buffers_kb.empty())
      throw Error(ErrorCode::kConfig, "sweep needs at least one buffer size");
    if (!positive(config.min_rtt_ms))
      throw Error(ErrorCode::kConfig, "sweep min-rtt must be positive");
    for (double kb : config.buffers_kb) {
      if (!positive(kb))
        throw Error(ErrorCode::kConfig, "buffer sizes must be positive");
      scenarios.push_back(make_flat_scenario(
          bw, config.min_rtt_ms * kMs, std::llround(kb * 1024.0),
          config.duration));
    }
  } else {
    if (config.min_rtts_ms.empty())
      throw Error(ErrorCode::kConfig, "sweep needs at least one min-rtt");
    if (!positive(config.qs_bdp))
      throw Error(ErrorCode::kConfig, "sweep qs must be positive");
    for (double rtt : config.min_rtts_ms) {
      if (!positive(rtt))
        throw Error(ErrorCode::kConfig, "min-rtt values must be positive");
      const Seconds min_rtt = rtt * kMs;
      const Bytes queue = std::max<Bytes>(
          kMss, std::llround(config.qs_bdp * bdp_bytes(bw, min_rtt)));
      Scenario s = make_flat_scenario(bw, min_rtt, queue, config.duration);
      s.qs_bdp = config.qs_bdp;
      scenarios.push_back(std::move(s));
    }
  }
  return run_scenarios(scenarios, config.schemes, config.alpha,
                       std::max(config.parallel, 1), config.to_json());
}

// ---------------------------------------------------------------------------
// Report

std::string results_csv(const ResultsBundle& bundle) {
  std::map<std::string, Benchmark> bench;
  for (const auto& s : bundle.scenarios) bench[s.id] = s.benchmark;
  std::string out =
      "scenario_id,benchmark,scheme,interval,r_mbps,d_ms,f_mbps,score_kind,"
      "score,is_winner\n";
  for (const auto& r : bundle.scores) {
    out += csv_field(r.scenario_id) + ',' +
           std::string(to_string(bench.at(r.scenario_id))) + ',' + r.scheme +
           ',' + std::to_string(r.interval) + ',' + shown(r.r_mbps) + ',' +
           (r.d_ms ? shown(*r.d_ms) : "") + ',' +
           (r.f_mbps ? shown(*r.f_mbps) : "") + ',' +
           std::string(to_string(r.kind)) + ',' +
           (r.value ? shown(*r.value) : "no-data") + ',' +
           (r.is_winner ? "1" : "0") + '\n';
  }
  return out;
}

std::string ranking_csv(const ResultsBundle& bundle) {
  std::string out = "# " + std::string(kRepetitionNote) + "\n";
  out += "benchmark,rank,scheme,winning_rate\n";
  for (const auto& [group, ranking] : bundle.rankings)
    for (std::size_t i = 0; i < ranking.size(); ++i)
      out += group + ',' + std::to_string(i + 1) + ',' + ranking[i].scheme +
             ',' + shown(ranking[i].winning_rate) + '\n';
  return out;
}

Report report(const ResultsBundle& bundle) {
  if (bundle.scores.empty() || bundle.scenarios.empty())
    throw Error(ErrorCode::kNoData, "bundle holds no scores");

  std::map<std::string, const Scenario*> by_id;
  for (const auto& s : bundle.scenarios) by_id[s.id] = &s;

  // (scenario, scheme) -> measurements in that cell
  std::map<std::pair<std::string, std::string>,
           std::vector<const IntervalMeasurement*>>
      cells;
  for (const auto& row : bundle.intervals)
    cells[{row.scenario_id, row.scheme}].push_back(&row.m);

  struct Key {
    std::string series, axis, scheme;
    double x;
    bool operator<(const Key& o) const {
      return std::tie(series, axis, scheme, x) <
             std::tie(o.series, o.axis, o.scheme, o.x);
    }
  };
  std::map<Key, SeriesPoint> points;
  for (const auto& [cell, ms] : cells) {
    const Scenario& s = *by_id.at(cell.first);
    std::string base = std::string(to_string(s.benchmark)) + ":bw" +
                       fmt(s.bw / kMbps, 6);
    if (s.step_multiplier) base += ":m" + fmt(*s.step_multiplier, 6);
    const std::string rtt_tag = ":rtt" + fmt(s.link.min_rtt / kMs, 6);
    const std::string queue_tag =
        s.qs_bdp ? ":qs" + fmt(*s.qs_bdp, 6)
                 : ":q" + std::to_string(s.link.queue_capacity) + "B";

    const IntervalMeasurement agg = aggregate(ms);
    const ScoreRecord rec =
        score_interval(agg, kind_for(s.benchmark), bundle.alpha, s.id,
                       cell.second);
    auto add = [&](const std::string& series, const char* axis, double x) {
      SeriesPoint p{series, axis, x, cell.second, rec.kind,
                    rec.value, rec.r_mbps, rec.d_ms};
      points[{series, axis, cell.second, x}] = p;
    };
    add(base + rtt_tag, "buffer_kb",
        static_cast<double>(s.link.queue_capacity) / 1024.0);
    add(base + queue_tag, "min_rtt_ms", s.link.min_rtt / kMs);
  }

  std::map<std::pair<std::string, std::string>, std::set<double>> xs;
  for (const auto& [k, p] : points) xs[{k.series, k.axis}].insert(k.x);

  Report r;
  r.ranking_csv = ranking_csv(bundle);
  r.series_csv = "series,axis,x,scheme,score_kind,score,r_mbps,d_ms\n";
  for (const auto& [k, p] : points) {
    if (xs[{k.series, k.axis}].size() < 2) continue;
    r.series_csv += p.series + ',' + p.axis + ',' + shown(p.x) + ',' +
                    p.scheme + ',' + std::string(to_string(p.kind)) + ',' +
                    (p.score ? shown(*p.score) : "no-data") + ',' +
                    shown(p.r_mbps) + ',' + (p.d_ms ? shown(*p.d_ms) : "") +
                    '\n';
    r.series.push_back(p);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Persistence

void write_bundle(const ResultsBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error(ErrorCode::kIo, "cannot create output directory " + dir);

  const fs::path root(dir);
  nlohmann::json meta = {
      {"format", "ccbench-bundle"},
      {"tool_version", bundle.tool_version},
      {"config_hash", bundle.config_hash},
      {"timestamp", bundle.timestamp},
      {"alpha", bundle.alpha},
      {"schemes", bundle.schemes},
      {"config", bundle.config},
      {"notes", kRepetitionNote},
      {"counts",
       {{"scenarios", bundle.scenarios.size()},
        {"score_records", bundle.scores.size()},
        {"failures", bundle.failures.size()}}},
  };
  write_file(root / "bundle.json", meta.dump(2) + "\n");
  write_file(root / "manifest.json",
             manifest_to_json(bundle.scenarios).dump(2) + "\n");
  write_file(root / "results.csv", results_csv(bundle));
  write_file(root / "ranking.csv", ranking_csv(bundle));

  std::string iv =
      "scenario_id,benchmark,scheme,flow_id,interval,t_start_s,t_end_s,"
      "bytes_acked,ack_count,rtt_sum_s,fair_share_bps\n";
  for (const auto& row : bundle.intervals) {
    const auto& m = row.m;
    iv += csv_field(row.scenario_id) + ',' +
          std::string(to_string(row.benchmark)) + ',' + row.scheme + ',' +
          std::to_string(m.flow_id) + ',' + std::to_string(m.interval_index) +
          ',' + exact(m.t_start) + ',' + exact(m.t_end) + ',' +
          std::to_string(m.bytes_acked) + ',' + std::to_string(m.ack_count) +
          ',' + exact(m.rtt_sum) + ',' +
          (m.fair_share ? exact(*m.fair_share) : "") + '\n';
  }
  write_file(root / "intervals.csv", iv);

  std::string fl =
      "scenario_id,scheme,flow_id,flow_scheme,start_s,bytes_sent,bytes_acked,"
      "ack_count,mean_rtt_ms,drops,loss_events,timeouts,stalled,stalled_at_s\n";
  for (const auto& f : bundle.flows)
    fl += csv_field(f.scenario_id) + ',' + f.scheme + ',' +
          std::to_string(f.flow_id) + ',' + f.flow_scheme + ',' +
          exact(f.start_time) + ',' + std::to_string(f.bytes_sent) + ',' +
          std::to_string(f.bytes_acked) + ',' + std::to_string(f.ack_count) +
          ',' + exact(f.mean_rtt / kMs) + ',' + std::to_string(f.drops) + ',' +
          std::to_string(f.loss_events) + ',' + std::to_string(f.timeouts) +
          ',' + (f.stalled ? "1" : "0") + ',' + exact(f.stalled_at) + '\n';
  write_file(root / "flows.csv", fl);

  std::string fa = "scenario_id,benchmark,scheme,interval,reason\n";
  for (const auto& f : bundle.failures)
    fa += csv_field(f.scenario_id) + ',' +
          std::string(to_string(f.benchmark)) + ',' + f.scheme + ',' +
          std::to_string(f.interval) + ',' + csv_field(f.reason) + '\n';
  write_file(root / "failures.csv", fa);

  if (!bundle.scores.empty())
    write_file(root / "series.csv", report(bundle).series_csv);
}

ResultsBundle load_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  if (!fs::is_directory(root))
    throw Error(ErrorCode::kIo, "no bundle directory at " + dir);

  ResultsBundle b;
  const auto meta = parse_json(read_file(root / "bundle.json"), "bundle.json");
  try {
    b.tool_version = meta.at("tool_version").get<std::string>();
    b.config_hash = meta.at("config_hash").get<std::string>();
    b.timestamp = meta.at("timestamp").get<std::string>();
    b.alpha = meta.at("alpha").get<double>();
    b.schemes = meta.at("schemes").get<std::vector<std::string>>();
    b.config = meta.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bundle.json: ") + e.what());
  }
  b.scenarios = manifest_from_json(
      parse_json(read_file(root / "manifest.json"), "manifest.json"));
  std::unordered_set<std::string> ids;
  for (const auto& s : b.scenarios) ids.insert(s.id);
  auto known = [&](const std::string& id) {
    if (!ids.contains(id))
      throw Error(ErrorCode::kConfig,
                  "scenario '" + id + "' is missing from the manifest");
    return id;
  };

  const CsvTable iv = read_csv(root / "intervals.csv");
  for (const auto& r : iv.rows) {
    IntervalRow row;
    row.scenario_id = known(r[iv.col("scenario_id")]);
    row.benchmark = parse_benchmark(r[iv.col("benchmark")]);
    row.scheme = r[iv.col("scheme")];
    row.m.flow_id = static_cast<std::uint32_t>(to_int(r[iv.col("flow_id")]));
    row.m.interval_index = static_cast<int>(to_int(r[iv.col("interval")]));
    row.m.t_start = to_double(r[iv.col("t_start_s")]);
    row.m.t_end = to_double(r[iv.col("t_end_s")]);
    row.m.bytes_acked = to_int(r[iv.col("bytes_acked")]);
    row.m.ack_count = static_cast<std::uint64_t>(to_int(r[iv.col("ack_count")]));
    row.m.rtt_sum = to_double(r[iv.col("rtt_sum_s")]);
    const auto& f = r[iv.col("fair_share_bps")];
    if (!f.empty()) row.m.fair_share = to_double(f);
    b.intervals.push_back(std::move(row));
  }

  const CsvTable fl = read_csv(root / "flows.csv");
  for (const auto& r : fl.rows) {
    FlowSummary f;
    f.scenario_id = known(r[fl.col("scenario_id")]);
    f.scheme = r[fl.col("scheme")];
    f.flow_id = static_cast<std::uint32_t>(to_int(r[fl.col("flow_id")]));
    f.flow_scheme = r[fl.col("flow_scheme")];
    f.start_time = to_double(r[fl.col("start_s")]);
    f.bytes_sent = to_int(r[fl.col("bytes_sent")]);
    f.bytes_acked = to_int(r[fl.col("bytes_acked")]);
    f.ack_count = static_cast<std::uint64_t>(to_int(r[fl.col("ack_count")]));
    f.mean_rtt = to_double(r[fl.col("mean_rtt_ms")]) * kMs;
    f.drops = static_cast<std::uint64_t>(to_int(r[fl.col("drops")]));
    f.loss_events = static_cast<std::uint64_t>(to_int(r[fl.col("loss_events")]));
    f.timeouts = static_cast<std::uint64_t>(to_int(r[fl.col("timeouts")]));
    f.stalled = r[fl.col("stalled")] == "1";
    f.stalled_at = to_double(r[fl.col("stalled_at_s")]);
    b.flows.push_back(std::move(f));
  }

  const CsvTable fa = read_csv(root / "failures.csv");
  for (const auto& r : fa.rows)
    b.failures.push_back({known(r[fa.col("scenario_id")]),
                          parse_benchmark(r[fa.col("benchmark")]),
                          r[fa.col("scheme")],
                          static_cast<int>(to_int(r[fa.col("interval")])),
                          r[fa.col("reason")]});

  rescore(b, b.alpha);
  return b;
}

}  // namespace ccb
