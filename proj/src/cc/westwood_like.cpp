#include <algorithm>

#include "ccbench/schemes.hpp"

namespace ccb {

namespace {
constexpr double kBweSmoothing = 0.875;  // Westwood+ low-pass filter
}

WestwoodLike::WestwoodLike(InitialState init)
    : cwnd_(std::max(init.cwnd, kMinCwnd)), ssthresh_(init.ssthresh) {}

CcDecision WestwoodLike::on_event(const CcEvent& event) {
  switch (event.kind) {
    case CcEventKind::kAck: {
      min_rtt_ = std::min(min_rtt_, event.rtt_sample);
      if (sample_start_ < 0) sample_start_ = event.now;
      sample_bytes_ += event.bytes_acked;
      // One bandwidth sample per min-RTT worth of acks.
      const Seconds span = event.now - sample_start_;
      if (span >= min_rtt_ && span > 0) {
        const BitsPerSecond sample =
            static_cast<double>(sample_bytes_) * 8.0 / span;
        bwe_ = bwe_ == 0 ? sample
                         : kBweSmoothing * bwe_ + (1 - kBweSmoothing) * sample;
        sample_start_ = event.now;
        sample_bytes_ = 0;
      }
      if (cwnd_ < ssthresh_) {
        cwnd_ += static_cast<double>(event.bytes_acked);
      } else {
        cwnd_ += kMss * static_cast<double>(event.bytes_acked) / cwnd_;
      }
      break;
    }
    case CcEventKind::kDupackLoss:
    case CcEventKind::kTimeoutLoss: {
      double bdp = bwe_ * min_rtt_ / 8.0;
      if (!(bdp > 0)) bdp = cwnd_ / 2.0;
      ssthresh_ = std::max(kMinCwnd, std::min(bdp, cwnd_ - kMss));
      cwnd_ = event.kind == CcEventKind::kTimeoutLoss ? kMinCwnd : ssthresh_;
      break;
    }
    case CcEventKind::kSendOpportunity:
    case CcEventKind::kTimerTick:
      break;
  }
  return CcDecision{cwnd_, std::nullopt};
}

}  // namespace ccb
