#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfdp/control.hpp"
#include "nfdp/metrics.hpp"
#include "nfdp/plant.hpp"
#include "nfdp/tolling.hpp"

namespace nfdp {

enum class SboStatus { converged, iteration_cap, diverged_periphery_suspected, no_pricing_needed };

const char* to_string(SboStatus status);

struct SboOptions {
  TollModel model = TollModel::distance;
  PiGains gains;          // nominal gains; $-per-hour rates scale them up
  double beta1_gain_scale = 30.0;  // scalar PI on the pure time toll
  double beta2_gain_scale = 90.0;  // scalar PI on delay rates (weaker leverage)
  double fee_gain_scale = 1.0;    // scalar PI on the cordon fee
  double alpha_max = 10.0;        // $/km
  double beta_max = 120.0;        // $/h
  double fee_max = 30.0;          // $
  double omega1 = 1.0;
  double omega2 = 0.5;
  bool time_dependent = false;
  double rate_step_s = 1200.0;    // 20-minute tolling intervals
  double epsilon_frac = 0.05;     // convergence band as a fraction of K_cr
  int n_max = 30;
  uint64_t seed = 1;
  bool force_beta1_zero = false;  // mu_beta1 = 0: JDTT degenerates to the distance toll
  std::optional<double> vbar_override_kmh;  // skip the cordon reference run
};

struct SboIterate {
  int iter = 0;   // 1-based, per phase
  int phase = 1;  // 1 = primary rate; 2 = delay phase of the sequential model
  TollSchedule schedule;  // rates computed at this iterate (implemented next run)
  double k_max = 0.0;
  double objective = 0.0;  // |k_max - k_cr|
  std::vector<double> k_max_steps;  // per tolling window when time-dependent
};

struct SboRun {
  SboStatus status = SboStatus::iteration_cap;
  TollModel model = TollModel::none;
  CriticalState crit;
  double epsilon = 0.0;
  std::vector<SboIterate> iterates;
  TollSchedule final_schedule;  // schedule of the last simulated run
  NfdSeries baseline_nfd;       // cordon NFD without pricing
  NfdSeries final_nfd;          // cordon NFD of the last simulated run
  SimOutput final_output;
  double vbar_kmh = 0.0;  // reference speed used for JDTT scale resolution
  std::string note;       // diagnostics (phase aborts etc.)
};

// Closed-loop toll optimization: baseline run, critical-state identification,
// then simulate/update iterations until |K_max - K_cr| <= epsilon on two
// consecutive iterations or n_max is reached.
SboRun optimize(const Scenario& scenario, const SboOptions& options);

// Sequential distance-then-delay optimization; returns (alpha*, beta2*).
std::pair<double, double> jddt_sequential(const Scenario& scenario, double omega2,
                                          const SboOptions& options);

// ---------------------------------------------------------------------------
// Multi-seed evaluation of a fixed toll schedule
// ---------------------------------------------------------------------------

struct BoxStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

BoxStats box_stats(std::vector<double> values);

struct SeedEvaluation {
  std::vector<uint64_t> seeds;
  std::vector<NfdSeries> per_seed_nfd;  // cordon
  NfdSeries averaged_nfd;               // mean K, Q, gamma per interval
  std::vector<double> max_sigma;        // per seed, within the tolling period
  std::vector<double> loop_area;        // per seed, full horizon
  std::vector<long> entries_in_period;  // per seed
  BoxStats sigma_stats;
};

SeedEvaluation multi_seed_evaluate(const Scenario& scenario, const TollSchedule& schedule,
                                   std::span<const uint64_t> seeds, const CriticalState& crit,
                                   const EnvelopeModel& envelope);

// Envelope from repeated no-toll runs (seeds 1..runs by default).
EnvelopeModel envelope_from_baseline_runs(const Scenario& scenario,
                                          std::span<const uint64_t> seeds);

// ---------------------------------------------------------------------------
// Demand sweep
// ---------------------------------------------------------------------------

struct SweepEntry {
  double multiplier = 1.0;
  SboStatus status = SboStatus::iteration_cap;
  double final_k_max = 0.0;
  double final_rate_sum = 0.0;  // sum of active rates at the last iterate
  NfdSeries periphery_nfd;      // of the final simulated run
  std::vector<SboIterate> iterates;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
};

// Runs optimize at each multiplier (ascending). An entry that hits the
// iteration cap while rates kept rising over the last window without K_max
// falling is relabeled diverged_periphery_suspected.
SweepReport demand_sweep(const Scenario& scenario, std::span<const double> multipliers,
                         const SboOptions& options);

}  // namespace nfdp
