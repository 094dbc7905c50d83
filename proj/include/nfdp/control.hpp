#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "nfdp/metrics.hpp"
#include "nfdp/plant.hpp"

namespace nfdp {

struct PiGains {
  double pp = 0.1;   // proportional
  double pi = 0.05;  // integral
};

// ---------------------------------------------------------------------------
// Scalar PI controller (single toll rate)
// ---------------------------------------------------------------------------

// Discrete PI update on a single rate:
//   r(1) = Pi * (Kmax(1) - Kcr)
//   r(i) = r(i-1) + Pp * (Kmax(i) - Kmax(i-1)) + Pi * (Kmax(i) - Kcr)
// clamped to [0, bound]. Hitting the upper bound freezes the rate; the lower
// clamp at zero is recoverable.
class ScalarPi {
 public:
  ScalarPi() = default;
  ScalarPi(PiGains gains, double k_cr, double bound)
      : gains_(gains), k_cr_(k_cr), bound_(bound) {}

  double init(double k_max_1);
  double update(double k_max_i);

  double rate() const { return rate_; }
  bool saturated_high() const { return frozen_; }
  int iterations() const { return static_cast<int>(k_max_history_.size()); }
  std::span<const double> rate_history() const { return rate_history_; }
  std::span<const double> k_max_history() const { return k_max_history_; }

 private:
  PiGains gains_;
  double k_cr_ = 0.0;
  double bound_ = 0.0;
  double rate_ = 0.0;
  double prev_k_max_ = 0.0;
  bool frozen_ = false;
  bool initialized_ = false;
  std::vector<double> rate_history_;
  std::vector<double> k_max_history_;
};

// ---------------------------------------------------------------------------
// Simultaneous dual-rate controller (distance + time)
// ---------------------------------------------------------------------------

// Scale parameters tying the two rates together: mu_alpha = 1 and
// mu_beta1 = vbar / omega1, where vbar is the mean in-cordon speed of the
// reference run over the tolling period.
struct ScalePair {
  double mu_alpha = 1.0;
  double mu_beta1 = 0.0;
};

ScalePair resolve_scale_pair(double omega1, double vbar_kmh);

// Mean over tolling-period intervals of the unweighted mean in-cordon link
// speed; the reference speed entering resolve_scale_pair.
double reference_mean_speed_kmh(const SimOutput& out, std::span<const int> cordon_links,
                                double period_start_s, double period_end_s);

// u(i) = u(i-1) + mu P E(i) with u = (alpha, beta1), P the rank-one nominal
// gain matrix, and E = (Kmax(i)-Kmax(i-1), Kmax(i)-Kcr). Absent saturation the
// iterates keep beta1 * mu_alpha == alpha * mu_beta1 exactly. A rate hitting
// its upper bound is frozen there and the other continues as a scalar PI.
class JdttController {
 public:
  JdttController() = default;
  JdttController(PiGains gains, ScalePair mu, double k_cr, double alpha_bound,
                 double beta_bound)
      : gains_(gains), mu_(mu), k_cr_(k_cr), alpha_bound_(alpha_bound),
        beta_bound_(beta_bound) {}

  void init(double k_max_1);
  void update(double k_max_i);

  double alpha() const { return alpha_; }
  double beta1() const { return beta1_; }
  bool alpha_frozen() const { return alpha_frozen_; }
  bool beta1_frozen() const { return beta1_frozen_; }
  std::span<const double> alpha_history() const { return alpha_history_; }
  std::span<const double> beta1_history() const { return beta1_history_; }

 private:
  void clamp_rates();

  PiGains gains_;
  ScalePair mu_;
  double k_cr_ = 0.0;
  double alpha_bound_ = 0.0;
  double beta_bound_ = 0.0;
  double alpha_ = 0.0;
  double beta1_ = 0.0;
  double prev_k_max_ = 0.0;
  bool alpha_frozen_ = false;
  bool beta1_frozen_ = false;
  bool initialized_ = false;
  std::vector<double> alpha_history_;
  std::vector<double> beta1_history_;
};

// ---------------------------------------------------------------------------
// Per-interval controller banks for time-dependent pricing
// ---------------------------------------------------------------------------

// Partition of the tolling period into rate steps; the last step may be
// shorter than step_s.
struct TollingWindows {
  double period_start_s = 0.0;
  double period_end_s = 0.0;
  double step_s = 0.0;
  int count = 0;

  double window_start_s(int m) const { return period_start_s + m * step_s; }
  double window_end_s(int m) const {
    double e = period_start_s + (m + 1) * step_s;
    return e < period_end_s ? e : period_end_s;
  }
};

TollingWindows make_tolling_windows(double period_start_s, double period_end_s,
                                    double step_s);

// Max K per window, measured from intervals whose start falls inside each
// window; windows with no intervals report 0.
std::vector<double> k_max_per_window(const NfdSeries& series, double interval_s,
                                     const TollingWindows& windows);

}  // namespace nfdp
