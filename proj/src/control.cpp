#include "nfdp/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nfdp {

double ScalarPi::init(double k_max_1) {
  rate_ = gains_.pi * (k_max_1 - k_cr_);
  if (rate_ < 0.0) rate_ = 0.0;
  if (rate_ >= bound_) {
    rate_ = bound_;
    frozen_ = true;
  }
  prev_k_max_ = k_max_1;
  initialized_ = true;
  k_max_history_.push_back(k_max_1);
  rate_history_.push_back(rate_);
  return rate_;
}

double ScalarPi::update(double k_max_i) {
  if (!initialized_) throw std::logic_error("ScalarPi::update before init");
  if (!frozen_) {
    rate_ += gains_.pp * (k_max_i - prev_k_max_) + gains_.pi * (k_max_i - k_cr_);
    if (rate_ < 0.0) rate_ = 0.0;  // recoverable lower clamp
    if (rate_ >= bound_) {         // upper bound freezes the rate
      rate_ = bound_;
      frozen_ = true;
    }
  }
  prev_k_max_ = k_max_i;
  k_max_history_.push_back(k_max_i);
  rate_history_.push_back(rate_);
  return rate_;
}

ScalePair resolve_scale_pair(double omega1, double vbar_kmh) {
  if (!(omega1 > 0)) throw std::invalid_argument("resolve_scale_pair: omega1 must be > 0");
  if (!(vbar_kmh > 0)) throw std::invalid_argument("resolve_scale_pair: vbar must be > 0");
  return ScalePair{1.0, vbar_kmh / omega1};
}

double reference_mean_speed_kmh(const SimOutput& out, std::span<const int> cordon_links,
                                double period_start_s, double period_end_s) {
  double sum = 0.0;
  int count = 0;
  for (int h = 0; h < out.num_intervals; ++h) {
    const double t = h * out.interval_s;
    if (t < period_start_s || t >= period_end_s) continue;
    sum += mean_subnetwork_speed_kmh(out, cordon_links, h);
    count++;
  }
  if (count == 0)
    throw std::invalid_argument("reference_mean_speed: no intervals inside the tolling period");
  return sum / count;
}

void JdttController::init(double k_max_1) {
  const double e_i = k_max_1 - k_cr_;
  alpha_ = mu_.mu_alpha * gains_.pi * e_i;
  beta1_ = mu_.mu_beta1 * gains_.pi * e_i;
  clamp_rates();
  prev_k_max_ = k_max_1;
  initialized_ = true;
  alpha_history_.push_back(alpha_);
  beta1_history_.push_back(beta1_);
}

void JdttController::update(double k_max_i) {
  if (!initialized_) throw std::logic_error("JdttController::update before init");
  const double step = gains_.pp * (k_max_i - prev_k_max_) + gains_.pi * (k_max_i - k_cr_);
  if (!alpha_frozen_) alpha_ += mu_.mu_alpha * step;
  if (!beta1_frozen_) beta1_ += mu_.mu_beta1 * step;
  clamp_rates();
  prev_k_max_ = k_max_i;
  alpha_history_.push_back(alpha_);
  beta1_history_.push_back(beta1_);
}

void JdttController::clamp_rates() {
  if (alpha_ < 0.0) alpha_ = 0.0;
  if (beta1_ < 0.0) beta1_ = 0.0;
  if (alpha_ >= alpha_bound_) {
    alpha_ = alpha_bound_;
    alpha_frozen_ = true;  // frozen at the cap; the other rate keeps adjusting
  }
  if (beta1_ >= beta_bound_) {
    beta1_ = beta_bound_;
    beta1_frozen_ = true;
  }
}

TollingWindows make_tolling_windows(double period_start_s, double period_end_s,
                                    double step_s) {
  if (!(step_s > 0)) throw std::invalid_argument("make_tolling_windows: step must be > 0");
  if (!(period_end_s > period_start_s))
    throw std::invalid_argument("make_tolling_windows: empty period");
  TollingWindows w;
  w.period_start_s = period_start_s;
  w.period_end_s = period_end_s;
  w.step_s = step_s;
  w.count = static_cast<int>(std::ceil((period_end_s - period_start_s) / step_s - 1e-9));
  return w;
}

std::vector<double> k_max_per_window(const NfdSeries& series, double interval_s,
                                     const TollingWindows& windows) {
  std::vector<double> k_max(windows.count, 0.0);
  for (int m = 0; m < windows.count; ++m)
    k_max[m] =
        k_max_in_window(series, interval_s, windows.window_start_s(m), windows.window_end_s(m));
  return k_max;
}

}  // namespace nfdp
