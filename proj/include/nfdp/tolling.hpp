#pragma once

#include <span>
#include <string>
#include <vector>

#include "nfdp/scenario.hpp"

namespace nfdp {

enum class TollModel { none, cordon, distance, time, delay, jdtt, jddt };

const char* to_string(TollModel model);
TollModel toll_model_from_string(const std::string& name);

// A toll schedule: pricing model, rates, tolling period, and (optionally)
// per-step rate vectors for time-dependent pricing. Rates outside the tolling
// period never apply.
struct TollSchedule {
  TollModel model = TollModel::none;
  double alpha = 0.0;       // $/km of in-cordon distance
  double beta1 = 0.0;       // $/h of in-cordon time
  double beta2 = 0.0;       // $/h of in-cordon delay
  double cordon_fee = 0.0;  // $ per trip, charged at first cordon entry

  double period_start_s = 0.0;  // [start, end) in seconds since simulation start
  double period_end_s = 0.0;

  // Time-dependent schedules hold rates constant within each step of this
  // duration; the last step may be shorter. Empty step vectors mean static.
  double step_s = 1200.0;
  std::vector<double> alpha_steps;
  std::vector<double> beta1_steps;
  std::vector<double> beta2_steps;
  std::vector<double> fee_steps;

  bool time_dependent() const {
    return !alpha_steps.empty() || !beta1_steps.empty() || !beta2_steps.empty() ||
           !fee_steps.empty();
  }
  bool active_at(double t_s) const {
    return model != TollModel::none && t_s >= period_start_s && t_s < period_end_s;
  }
  // Index of the time-dependent step containing t_s; valid only when active.
  int step_of(double t_s) const;

  double alpha_at(double t_s) const;
  double beta1_at(double t_s) const;
  double beta2_at(double t_s) const;
  double fee_at(double t_s) const;

  void validate() const;  // throws std::invalid_argument on negative rates etc.

  ordered_json to_json() const;
  static TollSchedule from_json(const json& doc);
};

// ---------------------------------------------------------------------------
// Path-level toll quantities (planning values used in route choice)
// ---------------------------------------------------------------------------

// Total in-cordon distance of a path (km); time-invariant.
double path_cordon_distance_km(const Path& path, const Network& network,
                               const CordonPartition& cordon);

// Total in-cordon time (hours) given per-link travel times in seconds.
double path_cordon_time_h(const Path& path, std::span<const double> link_time_s,
                          const CordonPartition& cordon);

// Total in-cordon delay (hours): sum of (t_a - free-flow) over cordon links.
double path_cordon_delay_h(const Path& path, std::span<const double> link_time_s,
                           const Network& network, const CordonPartition& cordon);

struct TollComponents {
  double distance_dollars = 0.0;
  double time_dollars = 0.0;
  double delay_dollars = 0.0;
  double fee_dollars = 0.0;

  double total() const { return distance_dollars + time_dollars + delay_dollars + fee_dollars; }
};

// Toll components for a path evaluated at eval_time_s. Inactive schedule (or
// eval time outside the tolling period) yields all zeros. Which components are
// non-zero follows the schedule's model.
TollComponents toll_components(const Path& path, std::span<const double> link_time_s,
                               const Network& network, const CordonPartition& cordon,
                               const TollSchedule& schedule, double eval_time_s);

// ---------------------------------------------------------------------------
// Per-trip settlement (realized tolls, accumulated link by link)
// ---------------------------------------------------------------------------

// On-board meter charging a single trip. A link is charged if its traversal
// completes during the tolling period, at the rates in force at that moment.
// The cordon model charges the flat fee once per trip, at the first cordon
// entry that falls inside the period.
struct TripTollMeter {
  double distance_dollars = 0.0;
  double time_dollars = 0.0;
  double delay_dollars = 0.0;
  double fee_dollars = 0.0;
  bool fee_charged = false;

  void on_cordon_entry(double t_s, const TollSchedule& schedule);
  void on_link_exit(const Link& link, bool in_cordon, double enter_s, double exit_s,
                    const TollSchedule& schedule);

  double total() const { return distance_dollars + time_dollars + delay_dollars + fee_dollars; }
};

}  // namespace nfdp
