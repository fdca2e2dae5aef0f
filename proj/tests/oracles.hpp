#pragma once

// Reference models used only by the tests. None of them shares code with the
// library; they are written from the textbook definitions.

#include <algorithm>
#include <cmath>

namespace oracle {

/// Root of f on [lo, hi] by bisection; f must change sign on the bracket.
template <typename F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Time for the cubic curve C*(t-K)^3 + W_max to rise from the post-loss
/// window beta*W_max back to W_max, found numerically.
inline double cubic_k(double w_max, double c, double beta) {
  return bisect([&](double k) { return c * k * k * k - w_max * (1 - beta); },
                0.0, 1e3);
}

struct FluidResult {
  double utilization = 0;    // delivered / capacity over the run
  double mean_queue_s = 0;   // time-averaged queueing delay
  int losses = 0;
};

/// Fluid model of one Cubic flow on a drop-tail link: slow start doubles the
/// window every RTT, a loss happens when the window exceeds BDP + buffer, the
/// window then falls to beta * W and regrows along the cubic curve. Rate is
/// W / RTT with RTT = min_rtt + backlog / capacity, capped at capacity.
inline FluidResult fluid_cubic(double capacity_bps, double min_rtt_s,
                               double buffer_bytes, double duration_s,
                               double mss = 1500, double c = 0.4,
                               double beta = 0.7, double w0 = 10) {
  const double cap_pkts = capacity_bps / (8 * mss);
  const double bdp = cap_pkts * min_rtt_s;
  const double limit = bdp + buffer_bytes / mss;
  const double dt = 1e-4;

  FluidResult r;
  double w = w0;
  bool slow_start = true;
  double epoch = 0, k = 0, w_max = 0;
  double delivered = 0, queue_time = 0;
  for (double t = 0; t < duration_s; t += dt) {
    const double backlog = std::max(0.0, w - bdp);
    const double rtt = min_rtt_s + backlog / cap_pkts;
    delivered += std::min(w / rtt, cap_pkts) * dt;
    queue_time += (rtt - min_rtt_s) * dt;
    if (slow_start) {
      w += w / rtt * dt;  // +1 packet per acked packet
    } else {
      const double tt = t - epoch;
      w = c * std::pow(tt - k, 3) + w_max;
    }
    if (w > limit) {
      ++r.losses;
      w_max = w;
      w = beta * w;
      k = std::cbrt(w_max * (1 - beta) / c);
      epoch = t;
      slow_start = false;
    }
  }
  r.utilization = delivered / (cap_pkts * duration_s);
  r.mean_queue_s = queue_time / duration_s;
  return r;
}

/// Vegas' estimate of its own queued packets: (expected - actual) * base.
inline double vegas_diff(double cwnd_pkts, double base_rtt, double rtt) {
  const double expected = cwnd_pkts / base_rtt;
  const double actual = cwnd_pkts / rtt;
  return (expected - actual) * base_rtt;
}

}  // namespace oracle
