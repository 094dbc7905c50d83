#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nfdp/metrics.hpp"
#include "nfdp/plant.hpp"
#include "nfdp/sbo.hpp"

namespace nfdp {

// Shortest round-trip decimal representation; keeps emitted files
// byte-identical across runs.
std::string format_double(double value);

uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// ---------------------------------------------------------------------------
// CSV emitters (plot-ready, parse-back tested)
// ---------------------------------------------------------------------------

// interval,link,density_vpkmpl,flow_vphpl,travel_time_s,speed_kmh,exits,queue_end
std::string link_states_csv(const SimOutput& out);

// vehicle,od,path,depart_s,complete_s,completed,distance_km,cordon_km,
// cordon_time_s,cordon_delay_s,toll_dollars,entered_cordon
std::string trips_csv(const SimOutput& out);

// interval,t_start_s,k_vpkmpl,q_vphpl,gamma_vpkmpl,vbar_kmh
std::string nfd_csv(const NfdSeries& series, double interval_s, double start_time_s);

// interval,k_vpkmpl,gamma_vpkmpl,envelope_gamma,sigma
std::string sigma_csv(const NfdSeries& series, const EnvelopeModel& envelope);

// iter,phase,alpha,beta1,beta2,fee,k_max,objective
std::string convergence_csv(const SboRun& run);

ordered_json summary_json(const PerformanceSummary& summary);
ordered_json run_report_json(const SboRun& run);
ordered_json sweep_report_json(const SweepReport& report);
ordered_json seed_evaluation_json(const SeedEvaluation& eval);

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

// A manifest embeds everything needed to re-execute the run bit-identically:
// the subcommand, the resolved scenario snapshot, the toll schedule, seeds,
// and checksums of every emitted artifact.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  ordered_json scenario_snapshot;
  ordered_json options;
  std::vector<uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> artifacts;  // (filename, fnv1a64)
};

ordered_json manifest_json(const RunManifest& manifest);

}  // namespace nfdp
