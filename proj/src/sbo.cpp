#include "nfdp/sbo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nfdp {

const char* to_string(SboStatus status) {
  switch (status) {
    case SboStatus::converged: return "converged";
    case SboStatus::iteration_cap: return "iteration-cap";
    case SboStatus::diverged_periphery_suspected: return "diverged-periphery-suspected";
    case SboStatus::no_pricing_needed: return "no-pricing-needed";
  }
  return "iteration-cap";
}

namespace {

struct PlantRun {
  SimOutput out;
  NfdSeries cordon_nfd;
  double k_max = 0.0;
  std::vector<double> k_max_windows;
};

PlantRun simulate_once(const Scenario& scn, const TollSchedule& sched, uint64_t seed,
                       const std::vector<int>& cordon_ids, const CriticalState& crit,
                       const TollingWindows& windows) {
  PlantRun r;
  r.out = run_horizon(scn, sched, seed);
  r.cordon_nfd = nfd_series(r.out, scn.network, cordon_ids);
  r.k_max = k_max_in_window(r.cordon_nfd, scn.demand.interval_s, crit.period_start_s,
                            crit.period_end_s);
  r.k_max_windows = k_max_per_window(r.cordon_nfd, scn.demand.interval_s, windows);
  return r;
}

enum class RateKind { fee, alpha, beta1, beta2 };

// Writes per-window rates into the schedule; a single window emits flat rates.
void apply_scalar_rates(TollSchedule& sched, RateKind kind, const std::vector<double>& rates) {
  const bool stepped = rates.size() > 1;
  auto set = [&](double& flat, std::vector<double>& steps) {
    if (stepped) {
      steps = rates;
    } else {
      flat = rates[0];
      steps.clear();
    }
  };
  switch (kind) {
    case RateKind::fee: set(sched.cordon_fee, sched.fee_steps); break;
    case RateKind::alpha: set(sched.alpha, sched.alpha_steps); break;
    case RateKind::beta1: set(sched.beta1, sched.beta1_steps); break;
    case RateKind::beta2: set(sched.beta2, sched.beta2_steps); break;
  }
}

struct BankOps {
  std::function<void(const std::vector<double>&)> init;
  std::function<void(const std::vector<double>&)> update;
  std::function<void(TollSchedule&)> apply;
  std::function<bool(int)> rate_is_zero;
};

SboIterate make_iterate(int iter, int phase, const TollSchedule& sched, double k_max,
                        const std::vector<double>& k_max_windows, double k_cr) {
  SboIterate it;
  it.iter = iter;
  it.phase = phase;
  it.schedule = sched;
  it.k_max = k_max;
  it.objective = std::abs(k_max - k_cr);
  it.k_max_steps = k_max_windows;
  return it;
}

// Shared simulate/update iteration skeleton. `first_run` supplies K_max(1);
// controllers must be uninitialized. Returns converged or iteration_cap and
// leaves the last simulated run in `run`.
SboStatus run_loop(const Scenario& scn, const SboOptions& opt, const CriticalState& crit,
                   double epsilon, const TollingWindows& windows,
                   const std::vector<int>& cordon_ids, const TollSchedule& base,
                   const BankOps& ops, int phase, const PlantRun& first_run, SboRun& run) {
  auto window_ok = [&](double k, int m) {
    return std::abs(k - crit.k_cr) <= epsilon || (k < crit.k_cr && ops.rate_is_zero(m));
  };
  auto all_ok = [&](const std::vector<double>& kw) {
    for (size_t m = 0; m < kw.size(); ++m)
      if (!window_ok(kw[m], static_cast<int>(m))) return false;
    return true;
  };

  ops.init(first_run.k_max_windows);
  TollSchedule sched = base;
  ops.apply(sched);
  run.iterates.push_back(
      make_iterate(1, phase, sched, first_run.k_max, first_run.k_max_windows, crit.k_cr));
  bool prev_ok = all_ok(first_run.k_max_windows);

  for (int i = 2; i <= opt.n_max; ++i) {
    run.final_schedule = sched;
    PlantRun r = simulate_once(scn, sched, opt.seed, cordon_ids, crit, windows);
    ops.update(r.k_max_windows);
    TollSchedule next = base;
    ops.apply(next);
    run.iterates.push_back(make_iterate(i, phase, next, r.k_max, r.k_max_windows, crit.k_cr));
    const bool ok = all_ok(r.k_max_windows);
    run.final_output = std::move(r.out);
    run.final_nfd = std::move(r.cordon_nfd);
    if (ok && prev_ok) return SboStatus::converged;
    prev_ok = ok;
    sched = next;
  }
  return SboStatus::iteration_cap;
}

BankOps scalar_bank_ops(std::vector<ScalarPi>& bank, RateKind kind) {
  BankOps ops;
  ops.init = [&bank](const std::vector<double>& kw) {
    for (size_t m = 0; m < bank.size(); ++m) bank[m].init(kw[m]);
  };
  ops.update = [&bank](const std::vector<double>& kw) {
    for (size_t m = 0; m < bank.size(); ++m) bank[m].update(kw[m]);
  };
  ops.apply = [&bank, kind](TollSchedule& sched) {
    std::vector<double> rates(bank.size());
    for (size_t m = 0; m < bank.size(); ++m) rates[m] = bank[m].rate();
    apply_scalar_rates(sched, kind, rates);
  };
  ops.rate_is_zero = [&bank](int m) { return bank[m].rate() <= 0.0; };
  return ops;
}

BankOps jdtt_bank_ops(std::vector<JdttController>& bank) {
  BankOps ops;
  ops.init = [&bank](const std::vector<double>& kw) {
    for (size_t m = 0; m < bank.size(); ++m) bank[m].init(kw[m]);
  };
  ops.update = [&bank](const std::vector<double>& kw) {
    for (size_t m = 0; m < bank.size(); ++m) bank[m].update(kw[m]);
  };
  ops.apply = [&bank](TollSchedule& sched) {
    std::vector<double> alphas(bank.size()), betas(bank.size());
    for (size_t m = 0; m < bank.size(); ++m) {
      alphas[m] = bank[m].alpha();
      betas[m] = bank[m].beta1();
    }
    apply_scalar_rates(sched, RateKind::alpha, alphas);
    apply_scalar_rates(sched, RateKind::beta1, betas);
  };
  ops.rate_is_zero = [&bank](int m) {
    return bank[m].alpha() <= 0.0 && bank[m].beta1() <= 0.0;
  };
  return ops;
}

double schedule_rate_sum(const TollSchedule& s) {
  double sum = s.alpha + s.beta1 + s.beta2 + s.cordon_fee;
  for (const auto* steps : {&s.alpha_steps, &s.beta1_steps, &s.beta2_steps, &s.fee_steps})
    sum += std::accumulate(steps->begin(), steps->end(), 0.0);
  return sum;
}

}  // namespace

SboRun optimize(const Scenario& scn, const SboOptions& opt) {
  if (opt.n_max < 2) throw std::invalid_argument("optimize: n_max must be >= 2");
  if (opt.model == TollModel::none) throw std::invalid_argument("optimize: pick a toll model");

  SboRun run;
  run.model = opt.model;
  const std::vector<int> cordon_ids = scn.cordon.cordon_links();

  // step i: simulate without pricing, measure the cordon NFD
  TollSchedule none;
  SimOutput baseline = run_horizon(scn, none, opt.seed);
  run.baseline_nfd = nfd_series(baseline, scn.network, cordon_ids);

  // step ii: critical density, tolling period, K_max(1)
  run.crit = identify_critical_state(run.baseline_nfd, scn.demand.interval_s);
  if (!run.crit.pricing_needed) {
    run.status = SboStatus::no_pricing_needed;
    run.final_nfd = run.baseline_nfd;
    run.final_output = std::move(baseline);
    return run;
  }
  run.epsilon = opt.epsilon_frac * run.crit.k_cr;

  const TollingWindows windows =
      opt.time_dependent
          ? make_tolling_windows(run.crit.period_start_s, run.crit.period_end_s, opt.rate_step_s)
          : make_tolling_windows(run.crit.period_start_s, run.crit.period_end_s,
                                 run.crit.period_end_s - run.crit.period_start_s);

  TollSchedule base;
  base.model = opt.model;
  base.period_start_s = run.crit.period_start_s;
  base.period_end_s = run.crit.period_end_s;
  base.step_s = windows.step_s;

  PlantRun first;
  first.cordon_nfd = run.baseline_nfd;
  first.k_max = run.crit.k_max;
  first.k_max_windows = k_max_per_window(run.baseline_nfd, scn.demand.interval_s, windows);
  first.out = std::move(baseline);

  const PiGains beta1_gains{opt.gains.pp * opt.beta1_gain_scale,
                            opt.gains.pi * opt.beta1_gain_scale};
  const PiGains beta2_gains{opt.gains.pp * opt.beta2_gain_scale,
                            opt.gains.pi * opt.beta2_gain_scale};
  const PiGains fee_gains{opt.gains.pp * opt.fee_gain_scale,
                          opt.gains.pi * opt.fee_gain_scale};

  switch (opt.model) {
    case TollModel::cordon:
    case TollModel::distance:
    case TollModel::time:
    case TollModel::delay: {
      RateKind kind = RateKind::alpha;
      PiGains gains = opt.gains;
      double bound = opt.alpha_max;
      if (opt.model == TollModel::cordon) {
        kind = RateKind::fee;
        gains = fee_gains;
        bound = opt.fee_max;
      } else if (opt.model == TollModel::time) {
        kind = RateKind::beta1;
        gains = beta1_gains;
        bound = opt.beta_max;
      } else if (opt.model == TollModel::delay) {
        kind = RateKind::beta2;
        gains = beta2_gains;
        bound = opt.beta_max;
      }
      std::vector<ScalarPi> bank(windows.count, ScalarPi(gains, run.crit.k_cr, bound));
      run.status = run_loop(scn, opt, run.crit, run.epsilon, windows, cordon_ids, base,
                            scalar_bank_ops(bank, kind), 1, first, run);
      break;
    }
    case TollModel::jdtt: {
      double vbar = 1.0;
      if (opt.force_beta1_zero) {
        run.note = "beta1 forced to zero; scale pair (1, 0)";
      } else if (opt.vbar_override_kmh) {
        vbar = *opt.vbar_override_kmh;
      } else {
        // the reference speed comes from the converged cordon-toll scenario
        SboOptions ref_opt = opt;
        ref_opt.model = TollModel::cordon;
        ref_opt.time_dependent = false;
        SboRun ref = optimize(scn, ref_opt);
        vbar = reference_mean_speed_kmh(ref.final_output, cordon_ids,
                                        run.crit.period_start_s, run.crit.period_end_s);
        if (ref.status != SboStatus::converged)
          run.note = std::string("cordon reference run ended ") + to_string(ref.status);
      }
      run.vbar_kmh = vbar;
      const ScalePair mu =
          opt.force_beta1_zero ? ScalePair{1.0, 0.0} : resolve_scale_pair(opt.omega1, vbar);
      std::vector<JdttController> bank(
          windows.count,
          JdttController(opt.gains, mu, run.crit.k_cr, opt.alpha_max, opt.beta_max));
      run.status = run_loop(scn, opt, run.crit, run.epsilon, windows, cordon_ids, base,
                            jdtt_bank_ops(bank), 1, first, run);
      break;
    }
    case TollModel::jddt: {
      // phase 1: pure distance toll on alpha
      std::vector<ScalarPi> alpha_bank(windows.count,
                                       ScalarPi(opt.gains, run.crit.k_cr, opt.alpha_max));
      run.status = run_loop(scn, opt, run.crit, run.epsilon, windows, cordon_ids, base,
                            scalar_bank_ops(alpha_bank, RateKind::alpha), 1, first, run);
      if (run.status != SboStatus::converged) {
        run.note = "phase 1 (distance) did not converge; delay phase skipped";
        break;
      }
      // phase 2: alpha fixed at omega2 * alpha*, scalar PI on beta2
      TollSchedule phase2 = base;
      const TollSchedule& star = run.final_schedule;
      std::vector<double> fixed_alpha(windows.count);
      for (int m = 0; m < windows.count; ++m) {
        const double a = star.alpha_steps.empty() ? star.alpha : star.alpha_steps[m];
        fixed_alpha[m] = opt.omega2 * a;
      }
      apply_scalar_rates(phase2, RateKind::alpha, fixed_alpha);

      PlantRun phase2_first = simulate_once(scn, phase2, opt.seed, cordon_ids, run.crit, windows);
      std::vector<ScalarPi> beta_bank(windows.count,
                                      ScalarPi(beta2_gains, run.crit.k_cr, opt.beta_max));
      run.status = run_loop(scn, opt, run.crit, run.epsilon, windows, cordon_ids, phase2,
                            scalar_bank_ops(beta_bank, RateKind::beta2), 2, phase2_first, run);
      break;
    }
    case TollModel::none:
      break;
  }
  return run;
}

std::pair<double, double> jddt_sequential(const Scenario& scn, double omega2,
                                          const SboOptions& options) {
  SboOptions opt = options;
  opt.model = TollModel::jddt;
  opt.omega2 = omega2;
  SboRun run = optimize(scn, opt);
  const TollSchedule& s = run.final_schedule;
  double alpha = s.alpha_steps.empty() ? s.alpha : s.alpha_steps.front();
  double beta2 = s.beta2_steps.empty() ? s.beta2 : s.beta2_steps.front();
  return {alpha, beta2};
}

// ---------------------------------------------------------------------------
// Multi-seed evaluation
// ---------------------------------------------------------------------------

BoxStats box_stats(std::vector<double> values) {
  BoxStats stats;
  if (values.empty()) return stats;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double pos = p * (values.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = static_cast<size_t>(std::ceil(pos));
    return values[lo] + (values[hi] - values[lo]) * (pos - lo);
  };
  stats.min = values.front();
  stats.q1 = quantile(0.25);
  stats.median = quantile(0.5);
  stats.q3 = quantile(0.75);
  stats.max = values.back();
  return stats;
}

SeedEvaluation multi_seed_evaluate(const Scenario& scn, const TollSchedule& schedule,
                                   std::span<const uint64_t> seeds, const CriticalState& crit,
                                   const EnvelopeModel& envelope) {
  if (seeds.size() < 2)
    throw std::invalid_argument("multi_seed_evaluate: need at least 2 seeds");
  SeedEvaluation eval;
  eval.seeds.assign(seeds.begin(), seeds.end());
  const std::vector<int> cordon_ids = scn.cordon.cordon_links();

  std::vector<std::future<std::pair<SimOutput, NfdSeries>>> futures;
  futures.reserve(seeds.size());
  for (uint64_t seed : seeds) {
    futures.push_back(std::async(std::launch::async, [&scn, &schedule, &cordon_ids, seed] {
      SimOutput out = run_horizon(scn, schedule, seed);
      NfdSeries nfd = nfd_series(out, scn.network, cordon_ids);
      return std::make_pair(std::move(out), std::move(nfd));
    }));
  }

  const double interval_s = scn.demand.interval_s;
  for (auto& fut : futures) {
    auto [out, nfd] = fut.get();
    double max_sigma = -std::numeric_limits<double>::infinity();
    for (const NfdPoint& p : nfd) {
      const double t = p.interval * interval_s;
      if (t < crit.period_start_s || t >= crit.period_end_s) continue;
      max_sigma = std::max(max_sigma, deviation_from_spread(p.gamma, p.k, envelope));
    }
    eval.max_sigma.push_back(max_sigma);
    eval.loop_area.push_back(hysteresis_loop_area(nfd));
    long entries = 0;
    for (int h = 0; h < out.num_intervals; ++h) {
      const double t = h * interval_s;
      if (t >= crit.period_start_s && t < crit.period_end_s) entries += out.cordon_entries[h];
    }
    eval.entries_in_period.push_back(entries);
    eval.per_seed_nfd.push_back(std::move(nfd));
  }

  const int num_intervals = static_cast<int>(eval.per_seed_nfd.front().size());
  eval.averaged_nfd.resize(num_intervals);
  for (int h = 0; h < num_intervals; ++h) {
    NfdPoint& avg = eval.averaged_nfd[h];
    avg.interval = h;
    for (const NfdSeries& nfd : eval.per_seed_nfd) {
      avg.k += nfd[h].k;
      avg.q += nfd[h].q;
      avg.gamma += nfd[h].gamma;
      avg.vbar_kmh += nfd[h].vbar_kmh;
    }
    const double n = static_cast<double>(eval.per_seed_nfd.size());
    avg.k /= n;
    avg.q /= n;
    avg.gamma /= n;
    avg.vbar_kmh /= n;
  }
  eval.sigma_stats = box_stats(eval.max_sigma);
  return eval;
}

EnvelopeModel envelope_from_baseline_runs(const Scenario& scn,
                                          std::span<const uint64_t> seeds) {
  const std::vector<int> cordon_ids = scn.cordon.cordon_links();
  TollSchedule none;
  std::vector<std::future<NfdSeries>> futures;
  futures.reserve(seeds.size());
  for (uint64_t seed : seeds)
    futures.push_back(std::async(std::launch::async, [&scn, &none, &cordon_ids, seed] {
      SimOutput out = run_horizon(scn, none, seed);
      return nfd_series(out, scn.network, cordon_ids);
    }));
  std::vector<NfdSeries> runs;
  runs.reserve(seeds.size());
  for (auto& fut : futures) runs.push_back(fut.get());
  return fit_lower_envelope(runs);
}

// ---------------------------------------------------------------------------
// Demand sweep
// ---------------------------------------------------------------------------

namespace {

bool divergence_suspected(const SboRun& run, double epsilon) {
  constexpr int kWindow = 5;
  const auto& its = run.iterates;
  if (run.status != SboStatus::iteration_cap) return false;
  if (static_cast<int>(its.size()) < kWindow + 1) return false;
  const size_t n = its.size();
  for (size_t i = n - kWindow; i < n; ++i) {
    if (schedule_rate_sum(its[i].schedule) < schedule_rate_sum(its[i - 1].schedule) - 1e-12)
      return false;  // rates backed off; the controller is still steering
  }
  const double k_last = its[n - 1].k_max;
  const double k_before = its[n - 1 - kWindow].k_max;
  const bool k_max_stuck = k_last >= k_before - 1e-9;
  const bool still_congested = k_last > run.crit.k_cr + epsilon;
  return k_max_stuck && still_congested;
}

}  // namespace

SweepReport demand_sweep(const Scenario& scenario, std::span<const double> multipliers,
                         const SboOptions& options) {
  SweepReport report;
  const std::vector<int> periphery = scenario.cordon.periphery_links();
  for (double multiplier : multipliers) {
    Scenario scn = scenario;
    scn.demand.multiplier = multiplier;
    SboRun run = optimize(scn, options);
    SweepEntry entry;
    entry.multiplier = multiplier;
    entry.status = divergence_suspected(run, run.epsilon)
                       ? SboStatus::diverged_periphery_suspected
                       : run.status;
    entry.final_k_max = run.iterates.empty() ? run.crit.k_max : run.iterates.back().k_max;
    entry.final_rate_sum =
        run.iterates.empty() ? 0.0 : schedule_rate_sum(run.iterates.back().schedule);
    entry.periphery_nfd = nfd_series(run.final_output, scn.network, periphery);
    entry.iterates = std::move(run.iterates);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace nfdp
