#include <algorithm>
#include <cmath>

#include "ccbench/schemes.hpp"

namespace ccb {

namespace {
// Reno-equivalent additive increase for the TCP-friendly region.
constexpr double kFriendlyAlpha = 3.0 * (1.0 - Cubic::kBeta) / (1.0 + Cubic::kBeta);
}  // namespace

Cubic::Cubic(InitialState init)
    : cwnd_(std::max(init.cwnd, kMinCwnd)), ssthresh_(init.ssthresh) {}

double Cubic::time_to_origin(double w_max_mss) {
  return std::cbrt(w_max_mss * (1.0 - kBeta) / kC);
}

double Cubic::window_at(double t, double k, double w_max_mss) {
  const double d = t - k;
  return kC * d * d * d + w_max_mss;
}

void Cubic::on_loss(bool timeout) {
  const double w = cwnd_ / kMss;
  epoch_start_ = -1;
  if (w < w_last_max_) {
    // Fast convergence: release bandwidth to newer flows.
    w_last_max_ = w;
    w_max_ = w * (1.0 + kBeta) / 2.0;
  } else {
    w_last_max_ = w;
    w_max_ = w;
  }
  ssthresh_ = std::max(cwnd_ * kBeta, kMinCwnd);
  cwnd_ = timeout ? kMinCwnd : ssthresh_;
}

CcDecision Cubic::on_event(const CcEvent& event) {
  switch (event.kind) {
    case CcEventKind::kAck: {
      min_rtt_ = std::min(min_rtt_, event.rtt_sample);
      if (cwnd_ < ssthresh_) {
        cwnd_ += static_cast<double>(event.bytes_acked);
        break;
      }
      const double w = cwnd_ / kMss;
      if (epoch_start_ < 0) {
        epoch_start_ = event.now;
        if (w < w_max_) {
          k_ = std::cbrt((w_max_ - w) / kC);
          origin_ = w_max_;
        } else {
          k_ = 0;
          origin_ = w;
        }
        w_est_ = w;
      }
      const double acked_mss = static_cast<double>(event.bytes_acked) / kMss;
      const double t = event.now - epoch_start_ + min_rtt_;
      const double target = window_at(t, k_, origin_);
      double next = w;
      if (target > w) {
        next += (target - w) / w * acked_mss;
      } else {
        next += 0.01 / w * acked_mss;
      }
      w_est_ += kFriendlyAlpha * acked_mss / w;
      next = std::max(next, w_est_);
      cwnd_ = next * kMss;
      break;
    }
    case CcEventKind::kDupackLoss:
      on_loss(false);
      break;
    case CcEventKind::kTimeoutLoss:
      on_loss(true);
      break;
    case CcEventKind::kSendOpportunity:
    case CcEventKind::kTimerTick:
      break;
  }
  return CcDecision{cwnd_, std::nullopt};
}

}  // namespace ccb
