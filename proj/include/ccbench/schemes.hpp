#pragma once

// Concrete congestion controllers. Each class follows its scheme's published
// control law; the simplifications relative to kernel implementations are
// listed next to each class.

#include <deque>
#include <limits>
#include <string_view>

#include "ccbench/cc.hpp"

namespace ccb {

/// Starting point shared by all schemes. Tests use it to place a controller
/// directly into congestion avoidance.
struct InitialState {
  double cwnd = kInitialCwnd;
  double ssthresh = std::numeric_limits<double>::infinity();
};

/// Packet-timed round counter: a round ends once the data that was in flight
/// when it began has been acknowledged.
class RoundTracker {
 public:
  /// Returns true when this ack closes the current round.
  bool on_ack(Bytes bytes_acked, Bytes in_flight);
  std::uint64_t rounds() const { return rounds_; }
  Bytes delivered() const { return delivered_; }

 private:
  Bytes delivered_ = 0;
  Bytes round_end_ = 0;
  std::uint64_t rounds_ = 0;
};

// ---------------------------------------------------------------------------

/// RFC 5681/6582 NewReno: slow start, one MSS per window of acked bytes in
/// congestion avoidance, halving on loss.
/// Simplifications: no fast-recovery window inflation (the simulator already
/// tracks the pipe); after a timeout the window restarts at 2 MSS, not 1.
class NewReno final : public CongestionControl {
 public:
  explicit NewReno(InitialState init = {});
  CcDecision on_event(const CcEvent& event) override;
  std::string_view id() const override { return "newreno"; }

  double cwnd() const { return cwnd_; }
  double ssthresh() const { return ssthresh_; }

 private:
  void congestion_avoidance(Bytes acked);

  double cwnd_;
  double ssthresh_;
  double ca_base_ = 0;   // window at the start of the current increase step
  double ca_acked_ = 0;  // bytes acked toward the next full MSS
};

// ---------------------------------------------------------------------------

/// RFC 8312 CUBIC with fast convergence and the TCP-friendly region.
/// Simplifications: no HyStart; the cubic target is evaluated against the
/// minimum observed RTT.
class Cubic final : public CongestionControl {
 public:
  static constexpr double kC = 0.4;
  static constexpr double kBeta = 0.7;

  explicit Cubic(InitialState init = {});
  CcDecision on_event(const CcEvent& event) override;
  std::string_view id() const override { return "cubic"; }

  /// Time for the cubic curve to climb back to `w_max_mss` after a decrease
  /// by kBeta.
  static double time_to_origin(double w_max_mss);
  /// W(t) = C (t - K)^3 + W_max, in MSS.
  static double window_at(double t, double k, double w_max_mss);

  double cwnd() const { return cwnd_; }
  double w_max_mss() const { return w_max_; }
  double k() const { return k_; }

 private:
  void on_loss(bool timeout);

  double cwnd_;
  double ssthresh_;
  double w_max_ = 0;
  double w_last_max_ = 0;
  double origin_ = 0;
  double k_ = 0;
  double w_est_ = 0;
  Seconds epoch_start_ = -1;
  Seconds min_rtt_ = std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------

/// TCP Vegas (Brakmo & Peterson, as in Linux tcp_vegas): once per round,
/// compare expected and actual rate and move the window by one packet to
/// keep between alpha and beta packets queued.
/// Simplifications: the slow-start exit test runs on every ack rather than
/// every other round; loss handling is Reno halving.
class Vegas final : public CongestionControl {
 public:
  static constexpr double kAlpha = 2;  // packets
  static constexpr double kBeta = 4;   // packets
  static constexpr double kGamma = 1;  // packets, slow-start exit

  explicit Vegas(InitialState init = {});
  CcDecision on_event(const CcEvent& event) override;
  std::string_view id() const override { return "vegas"; }

  /// Packets the flow keeps queued: (cwnd/base - cwnd/rtt) * base.
  static double queued_packets(double cwnd_packets, Seconds base_rtt,
                               Seconds rtt);

  double cwnd() const { return cwnd_; }
  Seconds base_rtt() const { return base_rtt_; }
  bool in_slow_start() const { return cwnd_ < ssthresh_; }

 private:
  double cwnd_;
  double ssthresh_;
  Seconds base_rtt_ = std::numeric_limits<double>::infinity();
  Seconds round_min_rtt_ = std::numeric_limits<double>::infinity();
  RoundTracker rounds_;
};

// ---------------------------------------------------------------------------

/// RFC 6817 LEDBAT with a 100 ms target and gain 1.
/// Simplifications: RTT stands in for one-way delay; the base delay is the
/// minimum over the whole run and the current-delay filter holds one sample.
/// There is no slow start: growth follows the delay controller from the
/// first ack.
class Ledbat final : public CongestionControl {
 public:
  static constexpr Seconds kTarget = 0.100;
  static constexpr double kGain = 1.0;
  static constexpr double kAllowedIncrease = 1.0;  // MSS

  explicit Ledbat(InitialState init = {});
  CcDecision on_event(const CcEvent& event) override;
  std::string_view id() const override { return "ledbat"; }

  double cwnd() const { return cwnd_; }
  Seconds base_delay() const { return base_delay_; }

 private:
  double cwnd_;
  Seconds base_delay_ = std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------

/// Model-based controller after BBR v1: startup, drain, gain-cycled
/// bandwidth probing and a periodic probe-RTT.
/// Simplifications: delivery rate is measured as the ack rate over the last
/// min-RTT; no app-limited or long-term bandwidth sampling; losses are
/// ignored except that a timeout drops the window to 4 packets.
class BbrLite final : public CongestionControl {
 public:
  enum class Mode { kStartup, kDrain, kProbeBw, kProbeRtt };

  static constexpr double kHighGain = 2.885;  // 2/ln 2
  static constexpr int kBwWindowRounds = 10;
  static constexpr Seconds kMinRttWindow = 10.0;
  static constexpr Seconds kProbeRttDuration = 0.200;
  static constexpr double kProbeRttCwnd = 4.0 * kMss;
  static constexpr double kGainCycle[8] = {1.25, 0.75, 1, 1, 1, 1, 1, 1};

  BbrLite();
  CcDecision on_event(const CcEvent& event) override;
  std::string_view id() const override { return "bbr_lite"; }

  Mode mode() const { return mode_; }
  double cwnd() const { return cwnd_; }
  BitsPerSecond bandwidth() const;
  Seconds min_rtt() const { return min_rtt_; }
  Seconds probe_rtt_done_at() const { return probe_rtt_done_; }

 private:
  void on_ack(const CcEvent& event);
  void update_min_rtt(Seconds now, Seconds rtt);
  void check_probe_rtt(const CcEvent& event);
  void enter_probe_rtt(Seconds now);
  void advance_cycle(const CcEvent& event);
  double bdp_bytes(double gain) const;
  CcDecision decision() const;

  bool started_ = false;
  Mode mode_ = Mode::kStartup;
  double cwnd_ = kInitialCwnd;
  double pacing_gain_ = kHighGain;
  double cwnd_gain_ = kHighGain;

  RoundTracker rounds_;
  struct BwSample {
    std::uint64_t round;
    BitsPerSecond bw;
  };
  std::deque<BwSample> bw_filter_;  // monotone max over kBwWindowRounds
  struct AckPoint {
    Seconds time;
    Bytes delivered;
  };
  std::deque<AckPoint> ack_history_;

  Seconds min_rtt_ = std::numeric_limits<double>::infinity();
  Seconds min_rtt_stamp_ = 0;

  BitsPerSecond full_bw_ = 0;
  int full_bw_count_ = 0;
  bool filled_pipe_ = false;

  int cycle_index_ = 0;
  Seconds cycle_stamp_ = 0;

  Seconds probe_rtt_done_ = 0;
  double prior_cwnd_ = 0;
};

// ---------------------------------------------------------------------------

/// Westwood+-style controller: Reno growth, but a loss sets the window from
/// the measured bandwidth times the minimum RTT.
/// Simplifications: a loss always removes at least one MSS so the reaction
/// is a strict decrease.
class WestwoodLike final : public CongestionControl {
 public:
  explicit WestwoodLike(InitialState init = {});
  CcDecision on_event(const CcEvent& event) override;
  std::string_view id() const override { return "westwood_like"; }

  double cwnd() const { return cwnd_; }
  BitsPerSecond bandwidth_estimate() const { return bwe_; }

 private:
  double cwnd_;
  double ssthresh_;
  Seconds min_rtt_ = std::numeric_limits<double>::infinity();
  BitsPerSecond bwe_ = 0;
  Seconds sample_start_ = -1;
  Bytes sample_bytes_ = 0;
};

// ---------------------------------------------------------------------------

/// Copa default mode: steer toward a target rate of 1/(delta * queueing
/// delay) with a velocity that doubles while the direction holds.
/// Simplifications: no competitive-mode switching; dupack losses are ignored.
class CopaLite final : public CongestionControl {
 public:
  static constexpr double kDelta = 0.5;

  CopaLite();
  CcDecision on_event(const CcEvent& event) override;
  std::string_view id() const override { return "copa_lite"; }

  double cwnd() const { return cwnd_; }

 private:
  double cwnd_ = kInitialCwnd;
  bool slow_start_ = true;
  double velocity_ = 1;
  int direction_ = 0;
  int same_direction_rounds_ = 0;
  double round_start_cwnd_ = kInitialCwnd;
  Seconds srtt_ = 0;
  Seconds min_rtt_ = std::numeric_limits<double>::infinity();
  Seconds min_rtt_stamp_ = 0;
  struct RttPoint {
    Seconds time;
    Seconds rtt;
  };
  std::deque<RttPoint> standing_;  // monotone min over srtt/2
  RoundTracker rounds_;
};

}  // namespace ccb
