#include "ccbench/scoring.hpp"

#include <algorithm>
#include <cmath>

namespace ccb {

namespace {
// Absorbs rounding in the margin products (0.9 * 100 and the like).
constexpr double kRelTol = 1e-12;
}  // namespace

std::string_view to_string(ScoreKind k) {
  return k == ScoreKind::kPower ? "power" : "friendliness";
}

std::string_view to_string(Direction d) {
  return d == Direction::kHigherBetter ? "higher_better" : "lower_better";
}

Direction direction_of(ScoreKind k) {
  return k == ScoreKind::kPower ? Direction::kHigherBetter
                                : Direction::kLowerBetter;
}

ScoreKind parse_score_kind(std::string_view s) {
  if (s == "power") return ScoreKind::kPower;
  if (s == "friendliness") return ScoreKind::kFriendliness;
  throw invalid_argument("unknown score kind '" + std::string(s) + "'");
}

double power_score(double r_mbps, double d_ms, double alpha) {
  if (!(d_ms > 0)) throw Error(ErrorCode::kNoData, "power score needs d > 0");
  if (r_mbps < 0) throw invalid_argument("power score needs r >= 0");
  if (!(alpha > 0)) throw invalid_argument("alpha must be > 0");
  return std::pow(r_mbps, alpha) / d_ms;
}

double friendliness_score(double f_mbps, double r_mbps) {
  if (!(f_mbps > 0)) throw invalid_argument("fair share must be > 0");
  if (r_mbps < 0) throw invalid_argument("rate must be >= 0");
  return std::abs(f_mbps - r_mbps);
}

BitsPerSecond IntervalMeasurement::rate() const {
  const Seconds len = t_end - t_start;
  return len > 0 ? static_cast<double>(bytes_acked) * 8.0 / len : 0.0;
}

Seconds IntervalMeasurement::mean_rtt() const {
  return ack_count > 0 ? rtt_sum / static_cast<double>(ack_count) : 0.0;
}

std::vector<IntervalMeasurement> interval_measurements(
    const FlowTrace& trace, const Scenario& scenario) {
  const Seconds begin = scenario.measurement_start();
  const Seconds end = scenario.duration;
  const Seconds len = (end - begin) / kIntervalsPerRun;

  std::vector<IntervalMeasurement> out(kIntervalsPerRun);
  for (int i = 0; i < kIntervalsPerRun; ++i) {
    auto& m = out[i];
    m.flow_id = trace.flow_id;
    m.interval_index = i;
    m.t_start = begin + i * len;
    m.t_end = i + 1 == kIntervalsPerRun ? end : begin + (i + 1) * len;
    if (scenario.benchmark == Benchmark::kCcBench2) {
      std::size_t active = 0;
      for (const auto& f : scenario.flows)
        if (f.start_time < m.t_end) ++active;
      m.fair_share = scenario.link.trace.mean_rate(m.t_start, m.t_end) /
                     static_cast<double>(std::max<std::size_t>(active, 1));
    }
  }
  for (const auto& a : trace.ack_records) {
    if (a.ack_time < begin || a.ack_time > end) continue;
    int idx = static_cast<int>((a.ack_time - begin) / len);
    idx = std::clamp(idx, 0, kIntervalsPerRun - 1);
    // Guard the boundaries against rounding in the division above.
    while (idx > 0 && a.ack_time < out[idx].t_start) --idx;
    while (idx + 1 < kIntervalsPerRun && a.ack_time >= out[idx + 1].t_start)
      ++idx;
    auto& m = out[idx];
    m.bytes_acked += a.bytes_acked;
    m.rtt_sum += a.rtt_sample;
    ++m.ack_count;
  }
  return out;
}

ScoreRecord score_interval(const IntervalMeasurement& m, ScoreKind kind,
                           double alpha, std::string scenario_id,
                           std::string scheme) {
  ScoreRecord rec;
  rec.scenario_id = std::move(scenario_id);
  rec.scheme = std::move(scheme);
  rec.interval = m.interval_index;
  rec.kind = kind;
  rec.r_mbps = m.rate() / kMbps;
  if (m.fair_share) rec.f_mbps = *m.fair_share / kMbps;
  if (!m.has_data()) return rec;
  rec.d_ms = m.mean_rtt() / kMs;
  if (kind == ScoreKind::kPower) {
    rec.value = power_score(rec.r_mbps, *rec.d_ms, alpha);
  } else {
    if (!rec.f_mbps)
      throw invalid_argument("friendliness score needs a fair share");
    rec.value = friendliness_score(*rec.f_mbps, rec.r_mbps);
  }
  return rec;
}

std::set<std::string> winners(std::span<const ScoreRecord> records) {
  std::set<std::string> out;
  if (records.empty()) return out;
  const auto& first = records.front();
  for (const auto& r : records)
    if (r.scenario_id != first.scenario_id || r.interval != first.interval ||
        r.kind != first.kind)
      throw invalid_argument("winner records must share one cell");

  const bool higher = first.direction() == Direction::kHigherBetter;
  std::optional<double> best;
  for (const auto& r : records) {
    if (!r.value) continue;
    if (!best || (higher ? *r.value > *best : *r.value < *best)) best = r.value;
  }
  if (!best) return out;

  for (const auto& r : records) {
    if (!r.value) continue;
    const double v = *r.value;
    bool win;
    if (higher) {
      win = v >= (1.0 - kWinMargin) * *best * (1.0 - kRelTol);
    } else if (*best == 0.0) {
      const double f = r.f_mbps.value_or(0.0);
      win = v <= kZeroBestEpsilon * f * (1.0 + kRelTol);
    } else {
      win = v <= (1.0 + kWinMargin) * *best * (1.0 + kRelTol);
    }
    if (win || v == *best) out.insert(r.scheme);
  }
  return out;
}

double winning_rate(std::span<const std::set<std::string>> cells,
                    const std::string& scheme) {
  if (cells.empty())
    throw Error(ErrorCode::kNoData, "winning rate over zero cells");
  std::size_t wins = 0;
  for (const auto& c : cells)
    if (c.contains(scheme)) ++wins;
  return 100.0 * static_cast<double>(wins) / static_cast<double>(cells.size());
}

Ranking rank(const std::map<std::string, double>& rates) {
  Ranking out;
  for (const auto& [scheme, rate] : rates) out.push_back({scheme, rate});
  std::stable_sort(out.begin(), out.end(),
                   [](const RankEntry& a, const RankEntry& b) {
                     if (a.winning_rate != b.winning_rate)
                       return a.winning_rate > b.winning_rate;
                     return a.scheme < b.scheme;
                   });
  return out;
}

}  // namespace ccb
