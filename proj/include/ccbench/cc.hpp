#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccbench/types.hpp"

namespace ccb {

enum class CcEventKind {
  kAck,
  kDupackLoss,
  kTimeoutLoss,
  kSendOpportunity,
  kTimerTick,
};

/// One input to a congestion controller. `rtt_sample` and `bytes_acked` are
/// meaningful only for kAck. `bytes_in_flight` is the sender's pipe estimate
/// after the event has been applied.
struct CcEvent {
  CcEventKind kind = CcEventKind::kAck;
  Seconds now = 0;
  Seconds rtt_sample = 0;
  Bytes bytes_acked = 0;
  Bytes bytes_in_flight = 0;
};

/// Control state handed back to the sender. An empty pacing rate means the
/// flow is purely window-limited.
struct CcDecision {
  double cwnd = 0;  // bytes
  std::optional<BitsPerSecond> pacing_rate;

  bool operator==(const CcDecision&) const = default;
};

/// A congestion-control state machine. Implementations must be pure functions
/// of their construction and the event sequence fed to them.
class CongestionControl {
 public:
  virtual ~CongestionControl() = default;

  virtual CcDecision on_event(const CcEvent& event) = 0;
  virtual std::string_view id() const = 0;
};

inline constexpr double kInitialCwnd = 10.0 * kMss;
inline constexpr double kMinCwnd = 2.0 * kMss;

/// Scheme identifiers available in this build, in a stable order.
const std::vector<std::string>& roster();

bool is_known_scheme(std::string_view id);

/// Throws Error(kUnknownScheme) for ids outside the roster.
std::unique_ptr<CongestionControl> make_scheme(std::string_view id);

}  // namespace ccb
