#pragma once

#include <span>
#include <vector>

#include "nfdp/plant.hpp"
#include "nfdp/scenario.hpp"

namespace nfdp {

// ---------------------------------------------------------------------------
// Network-level macroscopic quantities
// ---------------------------------------------------------------------------

// Weighted mean of `values` with the given weights (lane-km in the traffic
// use). Throws on empty or mismatched input.
double weighted_mean(std::span<const double> values, std::span<const double> weights);

// Square root of the weighted variance around the weighted mean.
double weighted_spread(std::span<const double> values, std::span<const double> weights);

double network_density(const SimOutput& out, const Network& net,
                       std::span<const int> link_ids, int interval);
double network_flow(const SimOutput& out, const Network& net, std::span<const int> link_ids,
                    int interval);
double spread_of_density(const SimOutput& out, const Network& net,
                         std::span<const int> link_ids, int interval);

// Unweighted mean link speed over the subnetwork for one interval.
double mean_subnetwork_speed_kmh(const SimOutput& out, std::span<const int> link_ids,
                                 int interval);

struct NfdPoint {
  int interval = 0;
  double k = 0.0;         // veh/km/lane
  double q = 0.0;         // veh/h/lane
  double gamma = 0.0;     // veh/km/lane, spatial spread of density
  double vbar_kmh = 0.0;  // mean link speed
};

using NfdSeries = std::vector<NfdPoint>;

NfdSeries nfd_series(const SimOutput& out, const Network& net, std::span<const int> link_ids);

// ---------------------------------------------------------------------------
// Lower envelope of the spread-accumulation relationship
// ---------------------------------------------------------------------------

// Zero-intercept cubic gamma(k) = a k^3 + b k^2 + c k.
struct EnvelopeModel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double eval(double k) const { return ((a * k + b) * k + c) * k; }
};

// Bins K (default 1 veh/km/lane bins), keeps the minimum gamma per non-empty
// bin, and least-squares fits the zero-intercept cubic through the minima.
// Throws if fewer than 4 bins are occupied.
EnvelopeModel fit_lower_envelope(std::span<const NfdSeries> runs, double bin_width = 1.0);

// sigma = gamma_observed - gamma(K); negative when below the envelope.
double deviation_from_spread(double gamma_observed, double k, const EnvelopeModel& envelope);

// ---------------------------------------------------------------------------
// Critical state and hysteresis
// ---------------------------------------------------------------------------

struct CriticalState {
  double k_cr = 0.0;
  double period_start_s = 0.0;  // [start, end) in seconds since simulation start
  double period_end_s = 0.0;
  double k_max = 0.0;  // max K within the period, from the identifying series
  bool pricing_needed = false;
};

// K_cr = midpoint of the max-mean-flow density bin; tolling period = smallest
// contiguous window covering all intervals with K > K_cr, on interval
// boundaries. pricing_needed is false when no interval exceeds K_cr.
CriticalState identify_critical_state(const NfdSeries& series, double interval_s,
                                      double bin_width = 2.0);

// Max K over intervals whose start lies in [start_s, end_s).
double k_max_in_window(const NfdSeries& series, double interval_s, double start_s,
                       double end_s);

// Absolute shoelace area of the time-ordered (K, Q) polygon.
double hysteresis_loop_area(const NfdSeries& series);

// ---------------------------------------------------------------------------
// Performance summaries (completed trips)
// ---------------------------------------------------------------------------

struct PerformanceRow {
  long vehicles = 0;
  double total_time_h = 0.0;
  double total_km = 0.0;
  double avg_km = 0.0;
  double avg_min = 0.0;
  double avg_speed_kmh = 0.0;
};

struct PerformanceSummary {
  PerformanceRow network;
  PerformanceRow cordon;  // trips that entered the cordon; in-cordon time/distance
  std::vector<long> cordon_entries;       // per interval
  std::vector<double> avg_queue_cordon;   // mean end-of-interval queue over cordon links
  long in_network_end = 0;
  bool stalled = false;
};

PerformanceSummary performance_summary(const SimOutput& out, const Scenario& scenario);

}  // namespace nfdp
