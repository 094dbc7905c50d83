#include "nfdp/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nfdp {

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

uint64_t fnv1a64(std::string_view data) {
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string fnv1a64_hex(std::string_view data) {
  static const char* digits = "0123456789abcdef";
  uint64_t h = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// CSV emitters
// ---------------------------------------------------------------------------

std::string link_states_csv(const SimOutput& out) {
  std::string csv = "interval,link,density_vpkmpl,flow_vphpl,travel_time_s,speed_kmh,exits,queue_end\n";
  for (int h = 0; h < out.num_intervals; ++h) {
    for (size_t lid = 0; lid < out.links[h].size(); ++lid) {
      const LinkIntervalState& st = out.links[h][lid];
      csv += std::to_string(h);
      csv += ',';
      csv += std::to_string(lid);
      csv += ',';
      csv += format_double(st.density_vpkmpl);
      csv += ',';
      csv += format_double(st.flow_vphpl);
      csv += ',';
      csv += format_double(st.travel_time_s);
      csv += ',';
      csv += format_double(st.speed_kmh);
      csv += ',';
      csv += std::to_string(st.exit_count);
      csv += ',';
      csv += std::to_string(st.queue_end);
      csv += '\n';
    }
  }
  return csv;
}

std::string trips_csv(const SimOutput& out) {
  std::string csv =
      "vehicle,od,path,depart_s,complete_s,completed,distance_km,cordon_km,cordon_time_s,"
      "cordon_delay_s,toll_dollars,entered_cordon\n";
  for (const TripRecord& t : out.trips) {
    csv += std::to_string(t.vehicle_id);
    csv += ',';
    csv += std::to_string(t.od_index);
    csv += ',';
    csv += std::to_string(t.path_index);
    csv += ',';
    csv += format_double(t.depart_s);
    csv += ',';
    csv += format_double(t.complete_s);
    csv += ',';
    csv += t.completed ? "1," : "0,";
    csv += format_double(t.distance_km);
    csv += ',';
    csv += format_double(t.cordon_km);
    csv += ',';
    csv += format_double(t.cordon_time_s);
    csv += ',';
    csv += format_double(t.cordon_delay_s);
    csv += ',';
    csv += format_double(t.toll_dollars);
    csv += ',';
    csv += t.entered_cordon ? "1\n" : "0\n";
  }
  return csv;
}

std::string nfd_csv(const NfdSeries& series, double interval_s, double start_time_s) {
  std::string csv = "interval,t_start_s,k_vpkmpl,q_vphpl,gamma_vpkmpl,vbar_kmh\n";
  for (const NfdPoint& p : series) {
    csv += std::to_string(p.interval);
    csv += ',';
    csv += format_double(start_time_s + p.interval * interval_s);
    csv += ',';
    csv += format_double(p.k);
    csv += ',';
    csv += format_double(p.q);
    csv += ',';
    csv += format_double(p.gamma);
    csv += ',';
    csv += format_double(p.vbar_kmh);
    csv += '\n';
  }
  return csv;
}

std::string sigma_csv(const NfdSeries& series, const EnvelopeModel& envelope) {
  std::string csv = "interval,k_vpkmpl,gamma_vpkmpl,envelope_gamma,sigma\n";
  for (const NfdPoint& p : series) {
    csv += std::to_string(p.interval);
    csv += ',';
    csv += format_double(p.k);
    csv += ',';
    csv += format_double(p.gamma);
    csv += ',';
    csv += format_double(envelope.eval(p.k));
    csv += ',';
    csv += format_double(deviation_from_spread(p.gamma, p.k, envelope));
    csv += '\n';
  }
  return csv;
}

std::string convergence_csv(const SboRun& run) {
  std::string csv = "iter,phase,alpha,beta1,beta2,fee,k_max,objective\n";
  for (const SboIterate& it : run.iterates) {
    const TollSchedule& s = it.schedule;
    auto first_or = [](const std::vector<double>& steps, double flat) {
      return steps.empty() ? flat : steps.front();
    };
    csv += std::to_string(it.iter);
    csv += ',';
    csv += std::to_string(it.phase);
    csv += ',';
    csv += format_double(first_or(s.alpha_steps, s.alpha));
    csv += ',';
    csv += format_double(first_or(s.beta1_steps, s.beta1));
    csv += ',';
    csv += format_double(first_or(s.beta2_steps, s.beta2));
    csv += ',';
    csv += format_double(first_or(s.fee_steps, s.cordon_fee));
    csv += ',';
    csv += format_double(it.k_max);
    csv += ',';
    csv += format_double(it.objective);
    csv += '\n';
  }
  return csv;
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

namespace {

ordered_json row_json(const PerformanceRow& row) {
  return ordered_json{{"vehicles", row.vehicles},
                      {"total_time_h", row.total_time_h},
                      {"total_km", row.total_km},
                      {"avg_km", row.avg_km},
                      {"avg_min", row.avg_min},
                      {"avg_speed_kmh", row.avg_speed_kmh}};
}

}  // namespace

ordered_json summary_json(const PerformanceSummary& summary) {
  return ordered_json{{"network", row_json(summary.network)},
                      {"cordon", row_json(summary.cordon)},
                      {"cordon_entries", summary.cordon_entries},
                      {"avg_queue_cordon", summary.avg_queue_cordon},
                      {"in_network_end", summary.in_network_end},
                      {"stalled", summary.stalled}};
}

ordered_json run_report_json(const SboRun& run) {
  ordered_json iterates = ordered_json::array();
  for (const SboIterate& it : run.iterates) {
    iterates.push_back(ordered_json{{"iter", it.iter},
                                    {"phase", it.phase},
                                    {"schedule", it.schedule.to_json()},
                                    {"k_max", it.k_max},
                                    {"objective", it.objective},
                                    {"k_max_steps", it.k_max_steps}});
  }
  return ordered_json{{"schema_version", 1},
                      {"model", to_string(run.model)},
                      {"status", to_string(run.status)},
                      {"k_cr", run.crit.k_cr},
                      {"epsilon", run.epsilon},
                      {"period_start_s", run.crit.period_start_s},
                      {"period_end_s", run.crit.period_end_s},
                      {"baseline_k_max", run.crit.k_max},
                      {"vbar_kmh", run.vbar_kmh},
                      {"final_schedule", run.final_schedule.to_json()},
                      {"note", run.note},
                      {"iterates", std::move(iterates)}};
}

ordered_json sweep_report_json(const SweepReport& report) {
  ordered_json entries = ordered_json::array();
  for (const SweepEntry& e : report.entries) {
    entries.push_back(ordered_json{{"multiplier", e.multiplier},
                                   {"status", to_string(e.status)},
                                   {"final_k_max", e.final_k_max},
                                   {"final_rate_sum", e.final_rate_sum},
                                   {"iterations", e.iterates.size()}});
  }
  return ordered_json{{"schema_version", 1}, {"entries", std::move(entries)}};
}

ordered_json seed_evaluation_json(const SeedEvaluation& eval) {
  return ordered_json{{"schema_version", 1},
                      {"seeds", eval.seeds},
                      {"max_sigma", eval.max_sigma},
                      {"loop_area", eval.loop_area},
                      {"entries_in_period", eval.entries_in_period},
                      {"sigma_stats", ordered_json{{"min", eval.sigma_stats.min},
                                                   {"q1", eval.sigma_stats.q1},
                                                   {"median", eval.sigma_stats.median},
                                                   {"q3", eval.sigma_stats.q3},
                                                   {"max", eval.sigma_stats.max}}}};
}

ordered_json manifest_json(const RunManifest& manifest) {
  ordered_json artifacts = ordered_json::array();
  for (const auto& [name, checksum] : manifest.artifacts)
    artifacts.push_back(ordered_json{{"file", name}, {"fnv1a64", checksum}});
  return ordered_json{{"schema_version", 1},
                      {"command", manifest.command},
                      {"argv", manifest.argv},
                      {"seeds", manifest.seeds},
                      {"options", manifest.options},
                      {"scenario", manifest.scenario_snapshot},
                      {"artifacts", std::move(artifacts)}};
}

}  // namespace nfdp
