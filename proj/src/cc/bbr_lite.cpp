#include <algorithm>

#include "ccbench/schemes.hpp"

namespace ccb {

namespace {
constexpr double kFullBwGrowth = 1.25;
constexpr int kFullBwRounds = 3;
constexpr double kProbeBwCwndGain = 2.0;
}  // namespace

BbrLite::BbrLite() = default;

BitsPerSecond BbrLite::bandwidth() const {
  return bw_filter_.empty() ? 0.0 : bw_filter_.front().bw;
}

double BbrLite::bdp_bytes(double gain) const {
  if (bw_filter_.empty() || min_rtt_ == std::numeric_limits<double>::infinity())
    return kInitialCwnd;
  return gain * bandwidth() * min_rtt_ / 8.0;
}

void BbrLite::update_min_rtt(Seconds now, Seconds rtt) {
  const bool expired = now - min_rtt_stamp_ > kMinRttWindow;
  if (rtt < min_rtt_ || expired) {
    min_rtt_ = rtt;
    min_rtt_stamp_ = now;
  }
  if (expired && mode_ != Mode::kProbeRtt) enter_probe_rtt(now);
}

void BbrLite::enter_probe_rtt(Seconds now) {
  (void)now;
  mode_ = Mode::kProbeRtt;
  prior_cwnd_ = std::max(prior_cwnd_, cwnd_);
  pacing_gain_ = 1.0;
  cwnd_gain_ = 1.0;
  probe_rtt_done_ = 0;
}

void BbrLite::check_probe_rtt(const CcEvent& event) {
  if (mode_ != Mode::kProbeRtt) return;
  if (probe_rtt_done_ == 0 && event.bytes_in_flight <= kProbeRttCwnd) {
    const Seconds hold =
        std::max(kProbeRttDuration,
                 min_rtt_ == std::numeric_limits<double>::infinity() ? 0.0
                                                                     : min_rtt_);
    probe_rtt_done_ = event.now + hold;
  } else if (probe_rtt_done_ > 0 && event.now >= probe_rtt_done_) {
    min_rtt_stamp_ = event.now;
    cwnd_ = std::max(cwnd_, prior_cwnd_);
    prior_cwnd_ = 0;
    probe_rtt_done_ = 0;
    if (filled_pipe_) {
      mode_ = Mode::kProbeBw;
      cycle_index_ = 2;
      cycle_stamp_ = event.now;
      pacing_gain_ = kGainCycle[cycle_index_];
      cwnd_gain_ = kProbeBwCwndGain;
    } else {
      mode_ = Mode::kStartup;
      pacing_gain_ = kHighGain;
      cwnd_gain_ = kHighGain;
    }
  }
}

void BbrLite::advance_cycle(const CcEvent& event) {
  if (mode_ != Mode::kProbeBw) return;
  const Seconds elapsed = event.now - cycle_stamp_;
  bool advance = elapsed > min_rtt_;
  // A draining phase may end as soon as the queue it targets is gone.
  if (pacing_gain_ < 1.0 &&
      static_cast<double>(event.bytes_in_flight) <= bdp_bytes(1.0))
    advance = true;
  if (!advance) return;
  cycle_index_ = (cycle_index_ + 1) % 8;
  cycle_stamp_ = event.now;
  pacing_gain_ = kGainCycle[cycle_index_];
}

void BbrLite::on_ack(const CcEvent& event) {
  const bool round_start =
      rounds_.on_ack(event.bytes_acked, event.bytes_in_flight);
  update_min_rtt(event.now, event.rtt_sample);

  // Delivery-rate sample: acked bytes over (roughly) the last min-RTT.
  ack_history_.push_back({event.now, rounds_.delivered()});
  const Seconds window = min_rtt_;
  while (ack_history_.size() > 2 &&
         ack_history_[1].time <= event.now - window)
    ack_history_.pop_front();
  const AckPoint& ref = ack_history_.front();
  const Seconds span = event.now - ref.time;
  if (span >= window * 0.5 && span > 0) {
    const BitsPerSecond sample =
        static_cast<double>(rounds_.delivered() - ref.delivered) * 8.0 / span;
    const std::uint64_t round = rounds_.rounds();
    while (!bw_filter_.empty() && bw_filter_.back().bw <= sample)
      bw_filter_.pop_back();
    bw_filter_.push_back({round, sample});
  }
  while (!bw_filter_.empty() &&
         bw_filter_.front().round + kBwWindowRounds <= rounds_.rounds())
    bw_filter_.pop_front();

  if (round_start && !filled_pipe_ && !bw_filter_.empty()) {
    if (bandwidth() >= full_bw_ * kFullBwGrowth) {
      full_bw_ = bandwidth();
      full_bw_count_ = 0;
    } else if (++full_bw_count_ >= kFullBwRounds) {
      filled_pipe_ = true;
    }
  }
  if (mode_ == Mode::kStartup && filled_pipe_) {
    mode_ = Mode::kDrain;
    pacing_gain_ = 1.0 / kHighGain;
    cwnd_gain_ = kHighGain;
  }
  if (mode_ == Mode::kDrain &&
      static_cast<double>(event.bytes_in_flight) <= bdp_bytes(1.0)) {
    mode_ = Mode::kProbeBw;
    cycle_index_ = 0;
    cycle_stamp_ = event.now;
    pacing_gain_ = kGainCycle[cycle_index_];
    cwnd_gain_ = kProbeBwCwndGain;
  }
  advance_cycle(event);
  check_probe_rtt(event);

  if (mode_ == Mode::kProbeRtt) return;
  const double target = std::max(bdp_bytes(cwnd_gain_), kProbeRttCwnd);
  if (filled_pipe_) {
    cwnd_ = std::min(cwnd_ + static_cast<double>(event.bytes_acked), target);
  } else if (cwnd_ < target ||
             rounds_.delivered() < static_cast<Bytes>(kInitialCwnd)) {
    cwnd_ += static_cast<double>(event.bytes_acked);
  }
  cwnd_ = std::max(cwnd_, kProbeRttCwnd);
}

CcDecision BbrLite::on_event(const CcEvent& event) {
  if (!started_) {
    started_ = true;
    min_rtt_stamp_ = event.now;
  }
  switch (event.kind) {
    case CcEventKind::kAck:
      on_ack(event);
      break;
    case CcEventKind::kTimerTick:
      if (mode_ != Mode::kProbeRtt && event.now - min_rtt_stamp_ > kMinRttWindow)
        enter_probe_rtt(event.now);
      check_probe_rtt(event);
      break;
    case CcEventKind::kTimeoutLoss:
      cwnd_ = kProbeRttCwnd;
      break;
    case CcEventKind::kDupackLoss:
    case CcEventKind::kSendOpportunity:
      break;
  }
  return decision();
}

CcDecision BbrLite::decision() const {
  CcDecision d;
  d.cwnd = mode_ == Mode::kProbeRtt ? kProbeRttCwnd : cwnd_;
  if (!bw_filter_.empty()) {
    d.pacing_rate = pacing_gain_ * bandwidth();
  } else if (min_rtt_ != std::numeric_limits<double>::infinity()) {
    d.pacing_rate = kHighGain * kInitialCwnd * 8.0 / min_rtt_;
  }
  return d;
}

}  // namespace ccb
