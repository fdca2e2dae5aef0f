#include <algorithm>
#include <cmath>

#include "ccbench/schemes.hpp"

namespace ccb {

namespace {
constexpr Seconds kMinRttWindow = 10.0;
constexpr double kMaxVelocity = 1024;
}  // namespace

CopaLite::CopaLite() = default;

CcDecision CopaLite::on_event(const CcEvent& event) {
  switch (event.kind) {
    case CcEventKind::kAck: {
      const Seconds rtt = event.rtt_sample;
      srtt_ = srtt_ == 0 ? rtt : 0.875 * srtt_ + 0.125 * rtt;
      if (rtt < min_rtt_ || event.now - min_rtt_stamp_ > kMinRttWindow) {
        min_rtt_ = rtt;
        min_rtt_stamp_ = event.now;
      }
      while (!standing_.empty() && standing_.back().rtt >= rtt)
        standing_.pop_back();
      standing_.push_back({event.now, rtt});
      while (standing_.front().time < event.now - srtt_ / 2.0)
        standing_.pop_front();
      const Seconds standing = standing_.front().rtt;
      const Seconds queueing = standing - min_rtt_;

      const double cwnd_pkts = cwnd_ / kMss;
      const double current_rate = cwnd_pkts / standing;  // packets/s
      const bool below_target =
          queueing <= 0 || current_rate <= 1.0 / (kDelta * queueing);
      const double acked_pkts = static_cast<double>(event.bytes_acked) / kMss;

      if (slow_start_) {
        if (below_target) {
          cwnd_ += static_cast<double>(event.bytes_acked);
        } else {
          slow_start_ = false;
        }
      }
      if (!slow_start_) {
        const double step = velocity_ / (kDelta * cwnd_pkts) * acked_pkts;
        cwnd_ += (below_target ? step : -step) * kMss;
        cwnd_ = std::max(cwnd_, kMinCwnd);
      }

      if (rounds_.on_ack(event.bytes_acked, event.bytes_in_flight)) {
        const int dir = cwnd_ > round_start_cwnd_   ? 1
                        : cwnd_ < round_start_cwnd_ ? -1
                                                    : 0;
        if (dir != 0 && dir == direction_) {
          if (++same_direction_rounds_ >= 3)
            velocity_ = std::min(velocity_ * 2.0, kMaxVelocity);
        } else {
          same_direction_rounds_ = 0;
          velocity_ = 1;
        }
        direction_ = dir;
        round_start_cwnd_ = cwnd_;
      }
      break;
    }
    case CcEventKind::kTimeoutLoss:
      slow_start_ = false;
      velocity_ = 1;
      cwnd_ = kMinCwnd;
      break;
    case CcEventKind::kDupackLoss:
    case CcEventKind::kSendOpportunity:
    case CcEventKind::kTimerTick:
      break;
  }
  CcDecision d{cwnd_, std::nullopt};
  if (srtt_ > 0 && !standing_.empty())
    d.pacing_rate = 2.0 * cwnd_ * 8.0 / standing_.front().rtt;
  return d;
}

}  // namespace ccb
