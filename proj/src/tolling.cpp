#include "nfdp/tolling.hpp"

#include <cmath>
#include <stdexcept>

namespace nfdp {

const char* to_string(TollModel model) {
  switch (model) {
    case TollModel::none: return "none";
    case TollModel::cordon: return "cordon";
    case TollModel::distance: return "distance";
    case TollModel::time: return "time";
    case TollModel::delay: return "delay";
    case TollModel::jdtt: return "jdtt";
    case TollModel::jddt: return "jddt";
  }
  return "none";
}

TollModel toll_model_from_string(const std::string& name) {
  for (TollModel m : {TollModel::none, TollModel::cordon, TollModel::distance, TollModel::time,
                      TollModel::delay, TollModel::jdtt, TollModel::jddt})
    if (name == to_string(m)) return m;
  throw std::invalid_argument("unknown toll model: " + name);
}

int TollSchedule::step_of(double t_s) const {
  int idx = static_cast<int>(std::floor((t_s - period_start_s) / step_s));
  return idx < 0 ? 0 : idx;
}

namespace {
double rate_at(const std::vector<double>& steps, double flat, int idx) {
  if (steps.empty()) return flat;
  if (idx >= static_cast<int>(steps.size())) idx = static_cast<int>(steps.size()) - 1;
  return steps[idx];
}
}  // namespace

double TollSchedule::alpha_at(double t_s) const {
  if (!active_at(t_s)) return 0.0;
  return rate_at(alpha_steps, alpha, step_of(t_s));
}

double TollSchedule::beta1_at(double t_s) const {
  if (!active_at(t_s)) return 0.0;
  return rate_at(beta1_steps, beta1, step_of(t_s));
}

double TollSchedule::beta2_at(double t_s) const {
  if (!active_at(t_s)) return 0.0;
  return rate_at(beta2_steps, beta2, step_of(t_s));
}

double TollSchedule::fee_at(double t_s) const {
  if (!active_at(t_s)) return 0.0;
  return rate_at(fee_steps, cordon_fee, step_of(t_s));
}

void TollSchedule::validate() const {
  auto check = [](double v, const char* name) {
    if (v < 0 || !std::isfinite(v))
      throw std::invalid_argument(std::string("toll schedule: ") + name + " must be >= 0");
  };
  check(alpha, "alpha");
  check(beta1, "beta1");
  check(beta2, "beta2");
  check(cordon_fee, "cordon_fee");
  for (double v : alpha_steps) check(v, "alpha_steps");
  for (double v : beta1_steps) check(v, "beta1_steps");
  for (double v : beta2_steps) check(v, "beta2_steps");
  for (double v : fee_steps) check(v, "fee_steps");
  if (period_end_s < period_start_s)
    throw std::invalid_argument("toll schedule: period end before start");
  if (!(step_s > 0)) throw std::invalid_argument("toll schedule: step_s must be > 0");
}

ordered_json TollSchedule::to_json() const {
  ordered_json doc{{"model", to_string(model)},
                   {"alpha", alpha},
                   {"beta1", beta1},
                   {"beta2", beta2},
                   {"cordon_fee", cordon_fee},
                   {"period_start_s", period_start_s},
                   {"period_end_s", period_end_s},
                   {"step_s", step_s}};
  if (!alpha_steps.empty()) doc["alpha_steps"] = alpha_steps;
  if (!beta1_steps.empty()) doc["beta1_steps"] = beta1_steps;
  if (!beta2_steps.empty()) doc["beta2_steps"] = beta2_steps;
  if (!fee_steps.empty()) doc["fee_steps"] = fee_steps;
  return doc;
}

TollSchedule TollSchedule::from_json(const json& doc) {
  TollSchedule s;
  s.model = toll_model_from_string(doc.value("model", std::string("none")));
  s.alpha = doc.value("alpha", 0.0);
  s.beta1 = doc.value("beta1", 0.0);
  s.beta2 = doc.value("beta2", 0.0);
  s.cordon_fee = doc.value("cordon_fee", 0.0);
  s.period_start_s = doc.value("period_start_s", 0.0);
  s.period_end_s = doc.value("period_end_s", 0.0);
  s.step_s = doc.value("step_s", 1200.0);
  if (doc.contains("alpha_steps")) s.alpha_steps = doc.at("alpha_steps").get<std::vector<double>>();
  if (doc.contains("beta1_steps")) s.beta1_steps = doc.at("beta1_steps").get<std::vector<double>>();
  if (doc.contains("beta2_steps")) s.beta2_steps = doc.at("beta2_steps").get<std::vector<double>>();
  if (doc.contains("fee_steps")) s.fee_steps = doc.at("fee_steps").get<std::vector<double>>();
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Path-level quantities
// ---------------------------------------------------------------------------

double path_cordon_distance_km(const Path& path, const Network& network,
                               const CordonPartition& cordon) {
  double km = 0.0;
  for (int lid : path.links)
    if (cordon.in_cordon[lid]) km += network.links[lid].length_km;
  return km;
}

double path_cordon_time_h(const Path& path, std::span<const double> link_time_s,
                          const CordonPartition& cordon) {
  double seconds = 0.0;
  for (int lid : path.links)
    if (cordon.in_cordon[lid]) seconds += link_time_s[lid];
  return seconds / 3600.0;
}

double path_cordon_delay_h(const Path& path, std::span<const double> link_time_s,
                           const Network& network, const CordonPartition& cordon) {
  double seconds = 0.0;
  for (int lid : path.links)
    if (cordon.in_cordon[lid])
      seconds += link_time_s[lid] - network.links[lid].free_flow_time_s();
  return seconds / 3600.0;
}

TollComponents toll_components(const Path& path, std::span<const double> link_time_s,
                               const Network& network, const CordonPartition& cordon,
                               const TollSchedule& schedule, double eval_time_s) {
  TollComponents out;
  if (!schedule.active_at(eval_time_s)) return out;
  switch (schedule.model) {
    case TollModel::none:
      break;
    case TollModel::cordon:
      if (path_cordon_distance_km(path, network, cordon) > 0)
        out.fee_dollars = schedule.fee_at(eval_time_s);
      break;
    case TollModel::distance:
      out.distance_dollars =
          schedule.alpha_at(eval_time_s) * path_cordon_distance_km(path, network, cordon);
      break;
    case TollModel::time:
      out.time_dollars =
          schedule.beta1_at(eval_time_s) * path_cordon_time_h(path, link_time_s, cordon);
      break;
    case TollModel::delay:
      out.delay_dollars = schedule.beta2_at(eval_time_s) *
                          path_cordon_delay_h(path, link_time_s, network, cordon);
      break;
    case TollModel::jdtt:
      out.distance_dollars =
          schedule.alpha_at(eval_time_s) * path_cordon_distance_km(path, network, cordon);
      out.time_dollars =
          schedule.beta1_at(eval_time_s) * path_cordon_time_h(path, link_time_s, cordon);
      break;
    case TollModel::jddt:
      out.distance_dollars =
          schedule.alpha_at(eval_time_s) * path_cordon_distance_km(path, network, cordon);
      out.delay_dollars = schedule.beta2_at(eval_time_s) *
                          path_cordon_delay_h(path, link_time_s, network, cordon);
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-trip settlement
// ---------------------------------------------------------------------------

void TripTollMeter::on_cordon_entry(double t_s, const TollSchedule& schedule) {
  if (schedule.model != TollModel::cordon || fee_charged) return;
  if (!schedule.active_at(t_s)) return;
  fee_dollars += schedule.fee_at(t_s);
  fee_charged = true;
}

void TripTollMeter::on_link_exit(const Link& link, bool in_cordon, double enter_s,
                                 double exit_s, const TollSchedule& schedule) {
  if (!in_cordon) return;
  if (!schedule.active_at(exit_s)) return;  // a link counts if its traversal ends in-period
  switch (schedule.model) {
    case TollModel::none:
    case TollModel::cordon:
      break;
    case TollModel::distance:
      distance_dollars += schedule.alpha_at(exit_s) * link.length_km;
      break;
    case TollModel::time:
      time_dollars += schedule.beta1_at(exit_s) * (exit_s - enter_s) / 3600.0;
      break;
    case TollModel::delay:
      delay_dollars +=
          schedule.beta2_at(exit_s) * (exit_s - enter_s - link.free_flow_time_s()) / 3600.0;
      break;
    case TollModel::jdtt:
      distance_dollars += schedule.alpha_at(exit_s) * link.length_km;
      time_dollars += schedule.beta1_at(exit_s) * (exit_s - enter_s) / 3600.0;
      break;
    case TollModel::jddt:
      distance_dollars += schedule.alpha_at(exit_s) * link.length_km;
      delay_dollars +=
          schedule.beta2_at(exit_s) * (exit_s - enter_s - link.free_flow_time_s()) / 3600.0;
      break;
  }
}

}  // namespace nfdp
