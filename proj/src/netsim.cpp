#include "ccbench/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <sstream>

namespace ccb {

// ---------------------------------------------------------------------------
// BandwidthTrace

BandwidthTrace::BandwidthTrace(std::vector<RateSegment> segments,
                               Seconds horizon)
    : segments_(std::move(segments)), horizon_(horizon) {
  if (segments_.empty()) throw invalid_argument("bandwidth trace is empty");
  if (segments_.front().start != 0.0)
    throw invalid_argument("bandwidth trace must start at t=0");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.rate > 0)) {
      std::ostringstream os;
      os << "bandwidth segment " << i << " has non-positive rate " << s.rate;
      throw invalid_argument(os.str());
    }
    if (s.rate > kMaxTraceRate) {
      std::ostringstream os;
      os << "bandwidth segment " << i << " exceeds 200 Mbps (" << s.rate
         << " bit/s)";
      throw invalid_argument(os.str());
    }
    if (i > 0 && !(s.start > segments_[i - 1].start))
      throw invalid_argument("bandwidth segments must be strictly ascending");
  }
  if (!(horizon_ > segments_.back().start))
    throw invalid_argument("bandwidth trace horizon precedes last segment");
}

BandwidthTrace BandwidthTrace::flat(BitsPerSecond rate, Seconds horizon) {
  return BandwidthTrace({{0.0, rate}}, horizon);
}

BitsPerSecond BandwidthTrace::rate_at(Seconds t) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](Seconds v, const RateSegment& s) { return v < s.start; });
  if (it == segments_.begin()) return segments_.front().rate;
  return std::prev(it)->rate;
}

double BandwidthTrace::integrate(Seconds t0, Seconds t1) const {
  if (t1 <= t0) return 0.0;
  double bits = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    Seconds a = segments_[i].start;
    Seconds b = i + 1 < segments_.size()
                    ? segments_[i + 1].start
                    : std::numeric_limits<double>::infinity();
    Seconds lo = std::max(a, t0);
    Seconds hi = std::min(b, t1);
    if (hi > lo) bits += (hi - lo) * segments_[i].rate;
  }
  return bits;
}

BitsPerSecond BandwidthTrace::mean_rate(Seconds t0, Seconds t1) const {
  if (t1 <= t0) return rate_at(t0);
  return integrate(t0, t1) / (t1 - t0);
}

void LinkConfig::validate() const {
  if (trace.segments().empty())
    throw invalid_argument("link has no bandwidth trace");
  if (!(min_rtt > 0)) throw invalid_argument("min_rtt must be positive");
  if (queue_capacity < kMss)
    throw invalid_argument("queue capacity must hold at least one packet");
}

Bytes FlowTrace::bytes_acked() const {
  Bytes total = 0;
  for (const auto& a : ack_records) total += a.bytes_acked;
  return total;
}

Seconds serialization_time(Bytes size, BitsPerSecond rate) {
  if (!(rate > 0)) throw invalid_argument("serialization rate must be > 0");
  if (size < 0) throw invalid_argument("packet size must be >= 0");
  return static_cast<double>(size) * 8.0 / rate;
}

// ---------------------------------------------------------------------------
// Simulator

namespace {

enum class EventKind : std::uint8_t {
  kFlowStart,
  kDeparture,
  kAckArrival,
  kPace,
  kRto,
  kTick,
};

struct Event {
  Seconds time;
  std::uint32_t flow;
  std::uint64_t seq;
  EventKind kind;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.flow != b.flow) return a.flow > b.flow;
    return a.seq > b.seq;
  }
};

struct Packet {
  std::uint32_t flow;
  std::uint64_t tx_id;
  std::uint64_t segment;
  Seconds sent_at;
};

struct Transmission {
  std::uint64_t tx_id;
  std::uint64_t segment;
};

struct Hole {
  Transmission tx;
  int later_acks = 0;
};

struct InboundAck {
  std::uint64_t tx_id;
  std::uint64_t segment;
  Seconds sent_at;
};

struct Sender {
  std::unique_ptr<CongestionControl> scheme;
  Seconds start = 0;
  Seconds stop = 0;
  CcDecision decision;

  bool active = false;
  bool terminated = false;

  std::uint64_t next_tx_id = 0;
  std::uint64_t next_segment = 0;
  std::deque<Transmission> unacked;  // tx order; may contain undetected drops
  std::deque<Hole> holes;            // passed over by later acks
  std::deque<std::uint64_t> retransmit;
  std::vector<bool> delivered;
  Bytes pipe = 0;
  std::uint64_t recovery_point = 0;

  bool has_rtt = false;
  Seconds srtt = 0;
  Seconds rttvar = 0;
  Seconds rto = 0;
  Seconds last_progress = 0;
  Seconds last_ack = 0;
  bool rto_pending = false;

  Seconds next_pace = 0;
  bool pace_pending = false;

  std::deque<InboundAck> inbound;
  Bytes network_bytes = 0;
  FlowTrace trace;

  bool outstanding() const {
    return !unacked.empty() || !holes.empty() || !retransmit.empty();
  }
};

class Simulator {
 public:
  Simulator(const LinkConfig& link, std::vector<FlowSetup> flows,
            const SimOptions& options)
      : link_(link), options_(options) {
    senders_.resize(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
      auto& s = senders_[i];
      s.scheme = std::move(flows[i].scheme);
      s.start = flows[i].start_time;
      s.stop = flows[i].stop_time;
      s.rto = options_.initial_rto;
      s.trace.flow_id = static_cast<std::uint32_t>(i);
      s.trace.start_time = s.start;
      if (s.stop > s.start) push(s.start, i, EventKind::kFlowStart);
    }
  }

  SimResult run() {
    const Seconds end = link_.trace.horizon();
    while (!events_.empty()) {
      Event ev = events_.top();
      if (ev.time > end) break;
      events_.pop();
      ++stats_.events;
      dispatch(ev);
    }
    SimResult result;
    result.stats = stats_;
    result.flows.reserve(senders_.size());
    for (auto& s : senders_) {
      s.trace.bytes_in_flight_at_end = s.network_bytes;
      result.flows.push_back(std::move(s.trace));
    }
    return result;
  }

 private:
  void push(Seconds t, std::size_t flow, EventKind kind) {
    events_.push(Event{t, static_cast<std::uint32_t>(flow), seq_++, kind});
  }

  void dispatch(const Event& ev) {
    auto& s = senders_[ev.flow];
    switch (ev.kind) {
      case EventKind::kFlowStart:
        on_flow_start(ev.flow, ev.time);
        break;
      case EventKind::kDeparture:
        on_departure(ev.time);
        break;
      case EventKind::kAckArrival:
        on_ack(ev.flow, ev.time);
        break;
      case EventKind::kPace:
        s.pace_pending = false;
        try_send(ev.flow, ev.time);
        break;
      case EventKind::kRto:
        on_rto(ev.flow, ev.time);
        break;
      case EventKind::kTick:
        on_tick(ev.flow, ev.time);
        break;
    }
  }

  void apply(Sender& s, const CcEvent& ev) {
    s.decision = s.scheme->on_event(ev);
  }

  CcEvent make_event(const Sender& s, CcEventKind kind, Seconds now) const {
    CcEvent ev;
    ev.kind = kind;
    ev.now = now;
    ev.bytes_in_flight = s.pipe;
    return ev;
  }

  void on_flow_start(std::size_t flow, Seconds now) {
    auto& s = senders_[flow];
    s.active = true;
    s.last_ack = now;
    s.last_progress = now;
    apply(s, make_event(s, CcEventKind::kSendOpportunity, now));
    push(now + options_.tick_interval, flow, EventKind::kTick);
    try_send(flow, now);
  }

  bool stall_check(std::size_t flow, Seconds now) {
    auto& s = senders_[flow];
    if (!s.terminated && s.outstanding() &&
        now - s.last_ack >= options_.stall_timeout) {
      s.terminated = true;
      s.active = false;
      s.trace.stalled = true;
      s.trace.stalled_at = now;
      return true;
    }
    return s.terminated;
  }

  void on_tick(std::size_t flow, Seconds now) {
    auto& s = senders_[flow];
    if (!s.active || stall_check(flow, now)) return;
    apply(s, make_event(s, CcEventKind::kTimerTick, now));
    try_send(flow, now);
    push(now + options_.tick_interval, flow, EventKind::kTick);
  }

  void arm_rto(std::size_t flow, Seconds now) {
    auto& s = senders_[flow];
    if (s.rto_pending) return;
    s.rto_pending = true;
    push(std::max(now, s.last_progress + s.rto), flow, EventKind::kRto);
  }

  void on_rto(std::size_t flow, Seconds now) {
    auto& s = senders_[flow];
    s.rto_pending = false;
    if (s.terminated) return;
    if (s.unacked.empty() && s.holes.empty()) return;
    if (stall_check(flow, now)) return;
    const Seconds deadline = s.last_progress + s.rto;
    if (now < deadline) {
      arm_rto(flow, now);
      return;
    }
    // Everything outstanding is presumed lost; go back and resend in order.
    for (const auto& h : s.holes)
      if (!s.delivered[h.tx.segment]) s.retransmit.push_back(h.tx.segment);
    for (const auto& t : s.unacked)
      if (!s.delivered[t.segment]) s.retransmit.push_back(t.segment);
    std::sort(s.retransmit.begin(), s.retransmit.end());
    s.retransmit.erase(std::unique(s.retransmit.begin(), s.retransmit.end()),
                       s.retransmit.end());
    s.holes.clear();
    s.unacked.clear();
    s.pipe = 0;
    s.recovery_point = s.next_tx_id;
    s.rto = std::min(2.0 * s.rto, options_.max_rto);
    s.last_progress = now;
    ++s.trace.timeouts;
    if (s.active) {
      apply(s, make_event(s, CcEventKind::kTimeoutLoss, now));
      try_send(flow, now);
    }
    if (s.outstanding()) arm_rto(flow, now);
  }

  void update_rtt(Sender& s, Seconds sample) {
    if (!s.has_rtt) {
      s.has_rtt = true;
      s.srtt = sample;
      s.rttvar = sample / 2.0;
    } else {
      s.rttvar = 0.75 * s.rttvar + 0.25 * std::abs(s.srtt - sample);
      s.srtt = 0.875 * s.srtt + 0.125 * sample;
    }
    s.rto = std::clamp(s.srtt + 4.0 * s.rttvar, options_.min_rto,
                       options_.max_rto);
  }

  void on_ack(std::size_t flow, Seconds now) {
    auto& s = senders_[flow];
    const InboundAck ack = s.inbound.front();
    s.inbound.pop_front();
    s.network_bytes -= kMss;
    const Seconds rtt = now - ack.sent_at;
    s.trace.ack_records.push_back(AckRecord{now, kMss, rtt, ack.tx_id});
    s.last_ack = now;
    if (s.terminated) return;

    if (!s.unacked.empty() && s.unacked.front().tx_id <= ack.tx_id) {
      // FIFO path: anything sent earlier and still unacked was dropped.
      while (s.unacked.front().tx_id < ack.tx_id) {
        s.holes.push_back(Hole{s.unacked.front(), 0});
        s.unacked.pop_front();
      }
      s.unacked.pop_front();
      s.pipe -= kMss;
    }
    s.delivered[ack.segment] = true;
    update_rtt(s, rtt);
    s.last_progress = now;

    bool new_loss = false;
    for (auto& h : s.holes) ++h.later_acks;
    while (!s.holes.empty() &&
           s.holes.front().later_acks >= options_.dupack_threshold) {
      const Hole h = s.holes.front();
      s.holes.pop_front();
      s.pipe -= kMss;
      if (!s.delivered[h.tx.segment]) s.retransmit.push_back(h.tx.segment);
      if (h.tx.tx_id >= s.recovery_point) {
        new_loss = true;
        s.recovery_point = s.next_tx_id;
      }
    }
    if (new_loss) ++s.trace.loss_events;

    if (s.active) {
      CcEvent ev = make_event(s, CcEventKind::kAck, now);
      ev.rtt_sample = rtt;
      ev.bytes_acked = kMss;
      apply(s, ev);
      if (new_loss) apply(s, make_event(s, CcEventKind::kDupackLoss, now));
      try_send(flow, now);
    }
  }

  void try_send(std::size_t flow, Seconds now) {
    auto& s = senders_[flow];
    while (s.active && now < s.stop &&
           static_cast<double>(s.pipe) < s.decision.cwnd) {
      if (s.decision.pacing_rate) {
        if (now < s.next_pace) {
          if (!s.pace_pending) {
            s.pace_pending = true;
            push(s.next_pace, flow, EventKind::kPace);
          }
          return;
        }
      }
      std::uint64_t segment;
      while (!s.retransmit.empty() && s.delivered[s.retransmit.front()])
        s.retransmit.pop_front();
      if (!s.retransmit.empty()) {
        segment = s.retransmit.front();
        s.retransmit.pop_front();
      } else {
        segment = s.next_segment++;
        s.delivered.push_back(false);
      }
      transmit(flow, segment, now);
      if (s.decision.pacing_rate)
        s.next_pace = std::max(s.next_pace, now) +
                      kMss * 8.0 / *s.decision.pacing_rate;
    }
  }

  void transmit(std::size_t flow, std::uint64_t segment, Seconds now) {
    auto& s = senders_[flow];
    if (s.unacked.empty() && s.holes.empty()) s.last_progress = now;
    const std::uint64_t tx_id = s.next_tx_id++;
    s.unacked.push_back(Transmission{tx_id, segment});
    s.pipe += kMss;
    s.trace.bytes_sent += kMss;
    s.network_bytes += kMss;
    enqueue(Packet{static_cast<std::uint32_t>(flow), tx_id, segment, now},
            now);
    arm_rto(flow, now);
  }

  void enqueue(const Packet& p, Seconds now) {
    if (!busy_) {
      start_service(p, now);
      return;
    }
    if (queued_bytes_ + kMss > link_.queue_capacity) {
      auto& s = senders_[p.flow];
      ++s.trace.drop_count;
      s.trace.bytes_dropped += kMss;
      s.network_bytes -= kMss;
      return;
    }
    queue_.push_back(p);
    queued_bytes_ += kMss;
    stats_.max_queue_bytes = std::max(stats_.max_queue_bytes, queued_bytes_);
  }

  void start_service(const Packet& p, Seconds now) {
    busy_ = true;
    in_service_ = p;
    const Seconds done =
        now + serialization_time(kMss, link_.trace.rate_at(now));
    push(done, p.flow, EventKind::kDeparture);
  }

  void on_departure(Seconds now) {
    const Packet p = in_service_;
    busy_ = false;
    auto& s = senders_[p.flow];
    s.inbound.push_back(InboundAck{p.tx_id, p.segment, p.sent_at});
    push(now + link_.min_rtt, p.flow, EventKind::kAckArrival);
    if (!queue_.empty()) {
      const Packet next = queue_.front();
      queue_.pop_front();
      queued_bytes_ -= kMss;
      start_service(next, now);
    }
  }

  const LinkConfig& link_;
  SimOptions options_;
  std::vector<Sender> senders_;
  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::uint64_t seq_ = 0;

  std::deque<Packet> queue_;
  Bytes queued_bytes_ = 0;
  bool busy_ = false;
  Packet in_service_{};
  SimStats stats_;
};

}  // namespace

SimResult simulate(const LinkConfig& link, std::vector<FlowSetup> flows,
                   const SimOptions& options) {
  link.validate();
  if (flows.empty()) throw invalid_argument("simulate needs at least one flow");
  for (const auto& f : flows) {
    if (!f.scheme) throw invalid_argument("flow has no congestion controller");
    if (f.start_time < 0 || f.stop_time < f.start_time)
      throw invalid_argument("flow needs 0 <= start_time <= stop_time");
    if (f.stop_time > link.trace.horizon() + 1e-9)
      throw invalid_argument("flow stop_time exceeds trace horizon");
  }
  return Simulator(link, std::move(flows), options).run();
}

}  // namespace ccb
