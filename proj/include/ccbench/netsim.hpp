#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ccbench/cc.hpp"
#include "ccbench/types.hpp"

namespace ccb {

struct RateSegment {
  Seconds start = 0;
  BitsPerSecond rate = 0;

  bool operator==(const RateSegment&) const = default;
};

/// Piecewise-constant bottleneck capacity. The last segment holds until
/// `horizon`.
class BandwidthTrace {
 public:
  BandwidthTrace() = default;
  /// Validates ordering, positivity and the rate cap; throws on violation.
  BandwidthTrace(std::vector<RateSegment> segments, Seconds horizon);

  static BandwidthTrace flat(BitsPerSecond rate, Seconds horizon);

  const std::vector<RateSegment>& segments() const { return segments_; }
  Seconds horizon() const { return horizon_; }

  BitsPerSecond rate_at(Seconds t) const;
  /// Bits the link can carry over [t0, t1].
  double integrate(Seconds t0, Seconds t1) const;
  /// Time-average rate over [t0, t1].
  BitsPerSecond mean_rate(Seconds t0, Seconds t1) const;

  bool operator==(const BandwidthTrace&) const = default;

 private:
  std::vector<RateSegment> segments_;
  Seconds horizon_ = 0;
};

struct LinkConfig {
  BandwidthTrace trace;
  Seconds min_rtt = 0;
  Bytes queue_capacity = 0;

  void validate() const;
};

struct AckRecord {
  Seconds ack_time = 0;
  Bytes bytes_acked = 0;
  Seconds rtt_sample = 0;
  std::uint64_t seq = 0;  // transmission counter of the acked packet
};

struct FlowTrace {
  std::uint32_t flow_id = 0;
  Seconds start_time = 0;
  std::vector<AckRecord> ack_records;
  std::uint64_t drop_count = 0;
  Bytes bytes_dropped = 0;
  Bytes bytes_sent = 0;
  /// Bytes still in the network (queued, in service or propagating) when the
  /// simulation stopped.
  Bytes bytes_in_flight_at_end = 0;
  std::uint64_t loss_events = 0;
  std::uint64_t timeouts = 0;
  bool stalled = false;
  Seconds stalled_at = 0;

  Bytes bytes_acked() const;
};

struct SimStats {
  Bytes max_queue_bytes = 0;
  std::uint64_t events = 0;
};

struct SimResult {
  std::vector<FlowTrace> flows;
  SimStats stats;
};

struct FlowSetup {
  std::unique_ptr<CongestionControl> scheme;
  Seconds start_time = 0;
  Seconds stop_time = 0;
};

/// Tunables for the sender model. Defaults match the documented behavior;
/// tests shrink them to reach edge cases.
struct SimOptions {
  Seconds tick_interval = 10 * kMs;
  Seconds min_rto = 200 * kMs;
  Seconds initial_rto = 1.0;
  Seconds max_rto = 60.0;
  /// A flow with data pending and no ack for this long is terminated.
  Seconds stall_timeout = 10.0;
  int dupack_threshold = 3;
};

Seconds serialization_time(Bytes size, BitsPerSecond rate);

/// Runs every flow over a shared drop-tail bottleneck until the last
/// stop_time. Deterministic for identical inputs.
SimResult simulate(const LinkConfig& link, std::vector<FlowSetup> flows,
                   const SimOptions& options = {});

}  // namespace ccb
