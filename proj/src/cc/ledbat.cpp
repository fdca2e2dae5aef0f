#include <algorithm>

#include "ccbench/schemes.hpp"

namespace ccb {

Ledbat::Ledbat(InitialState init)
    : cwnd_(std::max(init.cwnd, kMinCwnd)) {}

CcDecision Ledbat::on_event(const CcEvent& event) {
  switch (event.kind) {
    case CcEventKind::kAck: {
      base_delay_ = std::min(base_delay_, event.rtt_sample);
      const Seconds queuing = event.rtt_sample - base_delay_;
      const double off_target = (kTarget - queuing) / kTarget;
      const double prev = cwnd_;
      cwnd_ += kGain * off_target * static_cast<double>(event.bytes_acked) *
               kMss / cwnd_;
      // Flight size as it stood before this ack drained the pipe.
      const double flight =
          static_cast<double>(event.bytes_in_flight + event.bytes_acked);
      const double max_allowed = flight + kAllowedIncrease * kMss;
      if (cwnd_ > prev) cwnd_ = std::max(prev, std::min(cwnd_, max_allowed));
      cwnd_ = std::max(cwnd_, kMinCwnd);
      break;
    }
    case CcEventKind::kDupackLoss:
      cwnd_ = std::max(cwnd_ / 2.0, kMinCwnd);
      break;
    case CcEventKind::kTimeoutLoss:
      cwnd_ = kMinCwnd;
      break;
    case CcEventKind::kSendOpportunity:
    case CcEventKind::kTimerTick:
      break;
  }
  return CcDecision{cwnd_, std::nullopt};
}

}  // namespace ccb
