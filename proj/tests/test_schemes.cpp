#include <doctest.h>

#include <random>

#include "ccbench/schemes.hpp"
#include "oracles.hpp"

using namespace ccb;

namespace {

CcEvent ack(Seconds now, Seconds rtt, Bytes in_flight, Bytes acked = kMss) {
  CcEvent e;
  e.kind = CcEventKind::kAck;
  e.now = now;
  e.rtt_sample = rtt;
  e.bytes_acked = acked;
  e.bytes_in_flight = in_flight;
  return e;
}

CcEvent of_kind(CcEventKind k, Seconds now, Bytes in_flight = 0) {
  CcEvent e;
  e.kind = k;
  e.now = now;
  e.bytes_in_flight = in_flight;
  return e;
}

/// A plausible event stream: acks with jittered RTTs, occasional losses,
/// ticks and send opportunities, in nondecreasing time.
std::vector<CcEvent> random_events(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  const double base = 0.005 + 0.2 * u(rng);
  std::vector<CcEvent> out;
  double now = 0;
  for (int i = 0; i < n; ++i) {
    now += u(rng) * 0.004;
    const double p = u(rng);
    const Bytes flight = static_cast<Bytes>(u(rng) * 200) * kMss;
    if (p < 0.80)
      out.push_back(ack(now, base * (1 + 2 * u(rng)), flight));
    else if (p < 0.83)
      out.push_back(of_kind(CcEventKind::kDupackLoss, now, flight));
    else if (p < 0.84)
      out.push_back(of_kind(CcEventKind::kTimeoutLoss, now, 0));
    else if (p < 0.97)
      out.push_back(of_kind(CcEventKind::kTimerTick, now, flight));
    else
      out.push_back(of_kind(CcEventKind::kSendOpportunity, now, flight));
  }
  return out;
}

std::vector<CcDecision> replay(std::string_view id,
                               const std::vector<CcEvent>& events) {
  auto cc = make_scheme(id);
  std::vector<CcDecision> out;
  for (const auto& e : events) out.push_back(cc->on_event(e));
  return out;
}

}  // namespace

TEST_CASE("roster holds the required schemes and each is constructible") {
  const auto& r = roster();
  for (const char* id : {"newreno", "cubic", "vegas", "ledbat", "bbr_lite"})
    CHECK(is_known_scheme(id));
  for (const auto& id : r) {
    auto cc = make_scheme(id);
    REQUIRE(cc);
    CHECK(cc->id() == id);
  }
  CHECK_FALSE(is_known_scheme("orca"));
  CHECK_THROWS_AS(make_scheme("orca"), Error);
}

TEST_CASE("every scheme starts from a ten packet window") {
  for (const auto& id : roster()) {
    CAPTURE(id);
    auto cc = make_scheme(id);
    const auto d = cc->on_event(of_kind(CcEventKind::kSendOpportunity, 0));
    CHECK(d.cwnd == 10 * kMss);
  }
}

TEST_CASE("newreno congestion avoidance adds one MSS per window of acks") {
  NewReno r(InitialState{10 * kMss, 10 * kMss});
  auto d = r.on_event(ack(0.1, 0.04, 10 * kMss));
  // First ack: MSS * MSS / cwnd = 150 bytes.
  CHECK(d.cwnd == doctest::Approx(10 * kMss + 150));
  for (int i = 1; i < 10; ++i) d = r.on_event(ack(0.1 + i * 1e-3, 0.04, 10 * kMss));
  CHECK(d.cwnd == doctest::Approx(11 * kMss).epsilon(1e-12));
}

TEST_CASE("newreno halves on loss and restarts after a timeout") {
  NewReno r(InitialState{40 * kMss, 20 * kMss});
  CHECK(r.on_event(of_kind(CcEventKind::kDupackLoss, 1)).cwnd == 20 * kMss);
  CHECK(r.on_event(of_kind(CcEventKind::kTimeoutLoss, 2)).cwnd == 2 * kMss);
  CHECK(r.ssthresh() == 10 * kMss);
}

TEST_CASE("cubic time-to-origin matches an independent root finder") {
  const double k_ref = oracle::cubic_k(100, 0.4, 0.7);
  CHECK(k_ref == doctest::Approx(4.217).epsilon(1e-3));
  CHECK(Cubic::time_to_origin(100) == doctest::Approx(k_ref).epsilon(1e-12));
  CHECK(Cubic::window_at(k_ref, k_ref, 100) == doctest::Approx(100).epsilon(1e-12));
  CHECK(Cubic::window_at(0, k_ref, 100) == doctest::Approx(70).epsilon(1e-9));

  // Loss at 100 packets, then the first ack of the new epoch sets K.
  Cubic c(InitialState{100 * kMss, std::numeric_limits<double>::infinity()});
  c.on_event(ack(0.0, 0.04, 100 * kMss));
  const double before = c.cwnd() / kMss;
  const auto d = c.on_event(of_kind(CcEventKind::kDupackLoss, 0.1));
  CHECK(d.cwnd == doctest::Approx(0.7 * before * kMss));
  c.on_event(ack(0.2, 0.04, 50 * kMss));
  CHECK(c.w_max_mss() == doctest::Approx(before));
  CHECK(c.k() == doctest::Approx(oracle::cubic_k(before, 0.4, 0.7)).epsilon(1e-6));
}

TEST_CASE("cubic fast convergence lowers the remembered maximum") {
  Cubic c(InitialState{100 * kMss, 0});
  c.on_event(of_kind(CcEventKind::kDupackLoss, 0.0));  // W_max = 100
  c.on_event(of_kind(CcEventKind::kDupackLoss, 0.1));  // at 70 < 100
  CHECK(c.w_max_mss() == doctest::Approx(70 * 1.7 / 2));
}

TEST_CASE("vegas decreases when four packets sit in the queue") {
  CHECK(oracle::vegas_diff(20, 0.040, 0.050) == doctest::Approx(4.0));
  CHECK(Vegas::queued_packets(20, 0.040, 0.050) ==
        doctest::Approx(oracle::vegas_diff(20, 0.040, 0.050)).epsilon(1e-12));

  Vegas v(InitialState{19 * kMss, 19 * kMss});
  // Round 0: one ack at base RTT ends the empty first round; diff 0 < alpha.
  auto d = v.on_event(ack(0.0, 0.040, 19 * kMss));
  CHECK(d.cwnd == 20 * kMss);
  CHECK(v.base_rtt() == 0.040);
  // Round 1 spans the 19 packets then in flight. diff = 4 >= beta when it
  // closes.
  double t = 0.05;
  for (int i = 0; i < 18; ++i) {
    d = v.on_event(ack(t, 0.050, 20 * kMss));
    CHECK(d.cwnd == 20 * kMss);
    t += 0.0025;
  }
  d = v.on_event(ack(t, 0.050, 20 * kMss));
  CHECK(d.cwnd == 19 * kMss);
}

TEST_CASE("vegas grows below alpha and holds between alpha and beta") {
  Vegas v(InitialState{20 * kMss, 20 * kMss});
  v.on_event(ack(0.0, 0.040, 0));  // round of one ack, diff 0 -> +1
  CHECK(v.cwnd() == 21 * kMss);
  // diff = 21 * 0.005 / 0.045 = 2.33: inside [alpha, beta).
  double t = 0.1;
  for (int i = 0; i < 40; ++i, t += 0.002) v.on_event(ack(t, 0.045, 21 * kMss));
  CHECK(v.cwnd() == 21 * kMss);
}

TEST_CASE("ledbat steers toward its delay target") {
  Ledbat l(InitialState{20 * kMss, 0});
  l.on_event(ack(0.0, 0.040, 19 * kMss));  // base delay 40 ms
  const double start = l.cwnd();
  l.on_event(ack(0.01, 0.090, 19 * kMss));  // 50 ms queueing: grow
  CHECK(l.cwnd() > start);
  const double mid = l.cwnd();
  l.on_event(ack(0.02, 0.160, 19 * kMss));  // 120 ms queueing: shrink
  CHECK(l.cwnd() < mid);
  // Growth is capped one MSS above the flight that was outstanding.
  Ledbat capped(InitialState{20 * kMss, 0});
  capped.on_event(ack(0.0, 0.040, 2 * kMss));
  CHECK(capped.cwnd() == 20 * kMss);
}

TEST_CASE("bbr-lite enters probe-rtt when the min-rtt sample expires") {
  BbrLite b;
  b.on_event(of_kind(CcEventKind::kSendOpportunity, 0.0));
  double t = 0.040;
  for (; t < 9.99; t += 0.001) b.on_event(ack(t, 0.040, 40 * kMss));
  CHECK(b.mode() != BbrLite::Mode::kProbeRtt);
  CHECK(b.min_rtt() == 0.040);

  // The estimate was taken at 40 ms and expires ten seconds later.
  auto d = b.on_event(of_kind(CcEventKind::kTimerTick, 10.03, 40 * kMss));
  CHECK(b.mode() != BbrLite::Mode::kProbeRtt);
  d = b.on_event(of_kind(CcEventKind::kTimerTick, 10.05, 40 * kMss));
  CHECK(b.mode() == BbrLite::Mode::kProbeRtt);
  CHECK(d.cwnd == 4 * kMss);

  // The hold starts once the pipe has drained to four packets.
  d = b.on_event(of_kind(CcEventKind::kTimerTick, 10.06, 4 * kMss));
  CHECK(b.probe_rtt_done_at() == doctest::Approx(10.06 + 0.2));
  d = b.on_event(of_kind(CcEventKind::kTimerTick, 10.25, 4 * kMss));
  CHECK(b.mode() == BbrLite::Mode::kProbeRtt);
  CHECK(d.cwnd == 4 * kMss);
  d = b.on_event(of_kind(CcEventKind::kTimerTick, 10.27, 4 * kMss));
  CHECK(b.mode() != BbrLite::Mode::kProbeRtt);
  CHECK(d.cwnd > 4 * kMss);
}

TEST_CASE("bbr-lite probe-rtt lasts at least one min-rtt on long paths") {
  BbrLite b;
  b.on_event(of_kind(CcEventKind::kSendOpportunity, 0.0));
  for (double t = 0.3; t < 9.9; t += 0.01) b.on_event(ack(t, 0.300, 40 * kMss));
  b.on_event(of_kind(CcEventKind::kTimerTick, 10.35, 2 * kMss));
  REQUIRE(b.mode() == BbrLite::Mode::kProbeRtt);
  CHECK(b.probe_rtt_done_at() == doctest::Approx(10.35 + 0.3));
}

TEST_CASE("bbr-lite paces from its bandwidth estimate") {
  BbrLite b;
  b.on_event(of_kind(CcEventKind::kSendOpportunity, 0.0));
  // Acks arriving at 12 Mbps: one packet per millisecond.
  CcDecision d;
  for (int i = 0; i < 400; ++i)
    d = b.on_event(ack(0.040 + i * 0.001, 0.040, 40 * kMss));
  REQUIRE(d.pacing_rate);
  CHECK(b.bandwidth() == doctest::Approx(12e6).epsilon(0.05));
  CHECK(*d.pacing_rate > 0);
}

// ---------------------------------------------------------------------------
// Properties over random event streams

TEST_CASE("decisions are deterministic and replayable") {
  for (const auto& id : roster()) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      CAPTURE(id);
      CAPTURE(seed);
      const auto events = random_events(seed, 3000);
      const auto a = replay(id, events);
      const auto b = replay(id, events);
      CHECK(a == b);
      // A fresh instance fed a prefix then the rest reproduces the log.
      auto cc = make_scheme(id);
      std::vector<CcDecision> c;
      for (const auto& e : events) c.push_back(cc->on_event(e));
      CHECK(c == a);
    }
  }
}

TEST_CASE("window floor and pacing positivity hold on any event stream") {
  for (const auto& id : roster()) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      CAPTURE(id);
      CAPTURE(seed);
      for (const auto& d : replay(id, random_events(seed, 2000))) {
        CHECK(d.cwnd >= 2 * kMss);
        if (d.pacing_rate) CHECK(*d.pacing_rate > 0);
      }
    }
  }
}

TEST_CASE("bbr-lite never drops below its probe-rtt window") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    for (const auto& d : replay("bbr_lite", random_events(seed, 2000)))
      CHECK(d.cwnd >= 4 * kMss);
}

TEST_CASE("a dupack loss strictly shrinks loss-based windows above the floor") {
  for (const char* id : {"newreno", "cubic", "vegas", "westwood_like"}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      CAPTURE(id);
      CAPTURE(seed);
      const auto events = random_events(seed, 1500);
      auto cc = make_scheme(id);
      CcDecision last{};
      for (const auto& e : events) {
        const auto d = cc->on_event(e);
        if (e.kind == CcEventKind::kDupackLoss && last.cwnd > 2 * kMss)
          CHECK(d.cwnd < last.cwnd);
        last = d;
      }
    }
  }
}

TEST_CASE("delay-based schemes do not grow while delay sits above target") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const double base = 0.01 + 0.1 * u(rng);
    const auto warmup = 5 + static_cast<int>(u(rng) * 200);
    for (const char* id : {"vegas", "ledbat"}) {
      CAPTURE(id);
      CAPTURE(trial);
      auto cc = make_scheme(id);
      double t = 0;
      CcDecision d{};
      for (int i = 0; i < warmup; ++i, t += 0.001)
        d = cc->on_event(ack(t, base, 20 * kMss));
      // Constant ack spacing keeps the delivered rate fixed.
      for (int i = 0; i < 2000; ++i, t += 0.001) {
        double rtt;
        if (std::string_view(id) == "ledbat") {
          rtt = base + Ledbat::kTarget + 0.001 + 0.05 * u(rng);
        } else {
          // Enough delay that more than beta packets look queued.
          if (d.cwnd <= (Vegas::kBeta + 1) * kMss) break;
          rtt = base * 50 * (1 + u(rng));
        }
        const auto next = cc->on_event(ack(t, rtt, 20 * kMss));
        CHECK(next.cwnd <= d.cwnd);
        d = next;
      }
    }
  }
}

TEST_CASE("round tracker closes a round once the prior flight is acked") {
  RoundTracker r;
  CHECK(r.on_ack(kMss, 3 * kMss));  // first ack opens round 1
  CHECK_FALSE(r.on_ack(kMss, 3 * kMss));
  CHECK_FALSE(r.on_ack(kMss, 3 * kMss));
  CHECK(r.on_ack(kMss, 3 * kMss));
  CHECK(r.rounds() == 2);
  CHECK(r.delivered() == 4 * kMss);
}
