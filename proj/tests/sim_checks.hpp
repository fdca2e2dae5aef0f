#pragma once

// Randomized simulator scenarios and the invariant checks shared by the unit
// and acceptance tests.

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ccbench/cc.hpp"
#include "ccbench/netsim.hpp"

namespace simcheck {

struct RandomFlow {
  std::string scheme;
  double start = 0;
  double stop = 0;
};

struct RandomScenario {
  ccb::LinkConfig link;
  std::vector<RandomFlow> flows;
  std::string describe;
};

inline RandomScenario random_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  auto pick = [&](int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(rng);
  };

  RandomScenario s;
  const double horizon = uni(3.0, 8.0);
  std::vector<ccb::RateSegment> segs{{0.0, uni(2e6, 200e6)}};
  const int steps = pick(4);
  for (int i = 0; i < steps; ++i) {
    const double at = segs.back().start + uni(0.3, horizon / 2);
    if (at >= horizon) break;
    segs.push_back({at, uni(2e6, 200e6)});
  }
  const double min_rtt = uni(0.002, 0.2);
  const double bdp = segs.front().rate * min_rtt / 8;
  const auto queue = std::max<ccb::Bytes>(
      ccb::kMss, static_cast<ccb::Bytes>(bdp * uni(0.05, 6.0)));
  s.link = ccb::LinkConfig{ccb::BandwidthTrace(segs, horizon), min_rtt, queue};

  const auto& roster = ccb::roster();
  const int nflows = 1 + pick(3);
  for (int i = 0; i < nflows; ++i) {
    RandomFlow f;
    f.scheme = roster[pick(static_cast<int>(roster.size()))];
    f.start = i == 0 ? 0.0 : uni(0.0, horizon * 0.6);
    f.stop = pick(4) == 0 ? uni(f.start, horizon) : horizon;
    s.flows.push_back(f);
  }
  std::ostringstream os;
  os << "seed=" << seed << " rtt=" << min_rtt << " q=" << queue
     << " segs=" << segs.size() << " flows=" << nflows;
  s.describe = os.str();
  return s;
}

inline ccb::SimResult run(const RandomScenario& s) {
  std::vector<ccb::FlowSetup> setups;
  for (const auto& f : s.flows)
    setups.push_back({ccb::make_scheme(f.scheme), f.start, f.stop});
  return ccb::simulate(s.link, std::move(setups));
}

/// Returns "" when all invariants hold, otherwise the first violation.
inline std::string check_invariants(const ccb::LinkConfig& link,
                                    const ccb::SimResult& r) {
  const double mss_bits = ccb::kMss * 8.0;
  if (r.stats.max_queue_bytes > link.queue_capacity)
    return "queue occupancy exceeded capacity";

  std::vector<double> departures;
  for (const auto& f : r.flows) {
    if (f.bytes_sent !=
        f.bytes_acked() + f.bytes_dropped + f.bytes_in_flight_at_end)
      return "conservation broken for flow " + std::to_string(f.flow_id);
    for (std::size_t i = 0; i < f.ack_records.size(); ++i) {
      const auto& a = f.ack_records[i];
      if (a.rtt_sample < link.min_rtt) return "rtt sample below min_rtt";
      if (i > 0) {
        const auto& prev = f.ack_records[i - 1];
        if (a.ack_time < prev.ack_time) return "ack times went backwards";
        if (a.seq <= prev.seq) return "acks out of send order";
      }
      departures.push_back(a.ack_time - link.min_rtt);
    }
  }

  // Capacity bound on windows [d_i, d_j] between departures. A packet
  // departing at d_i was served before the window, hence j - i packets. Each
  // rate change inside the window can shift at most one packet's worth.
  std::sort(departures.begin(), departures.end());
  const auto& segs = link.trace.segments();
  const std::size_t n = departures.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t step = 1;; step *= 2) {
      const std::size_t j = std::min(n - 1, i + step);
      if (j <= i) break;
      const double t1 = departures[i], t2 = departures[j];
      std::size_t changes = 0;
      for (const auto& sg : segs)
        if (sg.start >= t1 && sg.start < t2) ++changes;
      const double bits = static_cast<double>(j - i) * mss_bits;
      const double bound = link.trace.integrate(t1, t2) +
                           mss_bits * static_cast<double>(1 + changes) + 1e-6;
      if (bits > bound) {
        std::ostringstream os;
        os << "capacity bound broken on [" << t1 << ", " << t2 << "]: " << bits
           << " > " << bound;
        return os.str();
      }
      if (j == n - 1) break;
    }
  }
  return "";
}

inline bool identical(const ccb::SimResult& a, const ccb::SimResult& b) {
  if (a.flows.size() != b.flows.size()) return false;
  if (a.stats.events != b.stats.events ||
      a.stats.max_queue_bytes != b.stats.max_queue_bytes)
    return false;
  for (std::size_t i = 0; i < a.flows.size(); ++i) {
    const auto& x = a.flows[i];
    const auto& y = b.flows[i];
    if (x.bytes_sent != y.bytes_sent || x.drop_count != y.drop_count ||
        x.loss_events != y.loss_events || x.timeouts != y.timeouts ||
        x.ack_records.size() != y.ack_records.size())
      return false;
    for (std::size_t k = 0; k < x.ack_records.size(); ++k) {
      const auto& p = x.ack_records[k];
      const auto& q = y.ack_records[k];
      if (p.ack_time != q.ack_time || p.rtt_sample != q.rtt_sample ||
          p.bytes_acked != q.bytes_acked || p.seq != q.seq)
        return false;
    }
  }
  return true;
}

}  // namespace simcheck
