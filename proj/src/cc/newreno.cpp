#include <algorithm>

#include "ccbench/schemes.hpp"

namespace ccb {

NewReno::NewReno(InitialState init)
    : cwnd_(std::max(init.cwnd, kMinCwnd)), ssthresh_(init.ssthresh) {}

void NewReno::congestion_avoidance(Bytes acked) {
  // Spread one MSS across the acks of a full window so every ack moves the
  // window by MSS*MSS/cwnd and a window's worth lands exactly on +1 MSS.
  if (ca_base_ <= 0) {
    ca_base_ = cwnd_;
    ca_acked_ = 0;
  }
  ca_acked_ += static_cast<double>(acked);
  while (ca_acked_ >= ca_base_) {
    ca_acked_ -= ca_base_;
    ca_base_ += kMss;
  }
  cwnd_ = ca_base_ + kMss * ca_acked_ / ca_base_;
}

CcDecision NewReno::on_event(const CcEvent& event) {
  switch (event.kind) {
    case CcEventKind::kAck:
      if (cwnd_ < ssthresh_) {
        cwnd_ += static_cast<double>(event.bytes_acked);
        ca_base_ = 0;
      } else {
        congestion_avoidance(event.bytes_acked);
      }
      break;
    case CcEventKind::kDupackLoss:
      ssthresh_ = std::max(cwnd_ / 2.0, kMinCwnd);
      cwnd_ = ssthresh_;
      ca_base_ = 0;
      break;
    case CcEventKind::kTimeoutLoss:
      ssthresh_ = std::max(cwnd_ / 2.0, kMinCwnd);
      cwnd_ = kMinCwnd;
      ca_base_ = 0;
      break;
    case CcEventKind::kSendOpportunity:
    case CcEventKind::kTimerTick:
      break;
  }
  return CcDecision{cwnd_, std::nullopt};
}

}  // namespace ccb
