#include <algorithm>

#include "ccbench/schemes.hpp"

namespace ccb {

namespace {
// Keeps the alpha/beta comparisons stable against rounding in the diff.
constexpr double kDiffEpsilon = 1e-9;
}  // namespace

Vegas::Vegas(InitialState init)
    : cwnd_(std::max(init.cwnd, kMinCwnd)), ssthresh_(init.ssthresh) {}

double Vegas::queued_packets(double cwnd_packets, Seconds base_rtt,
                             Seconds rtt) {
  return cwnd_packets * (rtt - base_rtt) / rtt;
}

CcDecision Vegas::on_event(const CcEvent& event) {
  switch (event.kind) {
    case CcEventKind::kAck: {
      base_rtt_ = std::min(base_rtt_, event.rtt_sample);
      round_min_rtt_ = std::min(round_min_rtt_, event.rtt_sample);
      const bool round_end =
          rounds_.on_ack(event.bytes_acked, event.bytes_in_flight);
      if (in_slow_start()) {
        const double diff =
            queued_packets(cwnd_ / kMss, base_rtt_, event.rtt_sample);
        if (diff > kGamma + kDiffEpsilon) {
          const double target = cwnd_ / kMss * base_rtt_ / event.rtt_sample;
          cwnd_ = std::max(std::min(cwnd_, (target + 1.0) * kMss), kMinCwnd);
          ssthresh_ = cwnd_;
          round_min_rtt_ = event.rtt_sample;
        } else {
          cwnd_ += static_cast<double>(event.bytes_acked);
        }
      } else if (round_end) {
        const double diff =
            queued_packets(cwnd_ / kMss, base_rtt_, round_min_rtt_);
        if (diff >= kBeta - kDiffEpsilon) {
          cwnd_ = std::max(cwnd_ - kMss, kMinCwnd);
        } else if (diff < kAlpha - kDiffEpsilon) {
          cwnd_ += kMss;
        }
        ssthresh_ = std::min(ssthresh_, cwnd_);
      }
      if (round_end) round_min_rtt_ = std::numeric_limits<double>::infinity();
      break;
    }
    case CcEventKind::kDupackLoss:
      ssthresh_ = std::max(cwnd_ / 2.0, kMinCwnd);
      cwnd_ = ssthresh_;
      break;
    case CcEventKind::kTimeoutLoss:
      ssthresh_ = std::max(cwnd_ / 2.0, kMinCwnd);
      cwnd_ = kMinCwnd;
      break;
    case CcEventKind::kSendOpportunity:
    case CcEventKind::kTimerTick:
      break;
  }
  return CcDecision{cwnd_, std::nullopt};
}

}  // namespace ccb
