#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace nfdp {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Raised for malformed or inconsistent scenario documents. `field` carries the
// path of the offending entry, e.g. "network.links[3].length_km".
struct ScenarioError : std::runtime_error {
  std::string field;
  ScenarioError(std::string field_, const std::string& what_)
      : std::runtime_error(field_.empty() ? what_ : field_ + ": " + what_),
        field(std::move(field_)) {}
};

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

struct Link {
  int id = -1;
  int from = -1;
  int to = -1;
  double length_km = 0.0;
  int lanes = 1;
  double free_speed_kmh = 0.0;
  double capacity_vphpl = 0.0;      // veh/h/lane
  double jam_density_vpkmpl = 0.0;  // veh/km/lane

  double free_flow_time_s() const { return length_km / free_speed_kmh * 3600.0; }
  double storage_veh() const { return jam_density_vpkmpl * length_km * lanes; }
  double lane_km() const { return length_km * lanes; }
};

struct Network {
  int num_nodes = 0;             // node ids are 0..num_nodes-1
  std::vector<Link> links;       // link.id == index into this vector
  std::vector<int> centroids;    // demand attachment nodes

  // Derived adjacency, rebuilt after load; link ids kept ascending.
  std::vector<std::vector<int>> out_links;
  std::vector<std::vector<int>> in_links;

  void rebuild_adjacency();
};

struct CordonPartition {
  std::vector<char> in_cordon;  // indexed by link id; the complement is the periphery

  int count() const;
  std::vector<int> cordon_links() const;
  std::vector<int> periphery_links() const;
  std::vector<int> all_links() const;
};

// ---------------------------------------------------------------------------
// Demand and paths
// ---------------------------------------------------------------------------

struct OdPair {
  int origin = -1;
  int dest = -1;
};

struct DemandTable {
  double interval_s = 300.0;
  int num_intervals = 0;  // N_T
  double multiplier = 1.0;
  std::vector<OdPair> od;
  std::vector<std::vector<double>> demand;  // [od index][interval], veh per interval

  double horizon_s() const { return interval_s * num_intervals; }
};

struct Path {
  std::vector<int> links;  // contiguous link id sequence, no repeats
  double length_km = 0.0;
  double free_flow_time_s = 0.0;
};

struct PathSet {
  std::vector<std::vector<Path>> routes;  // [od index][path], cheapest first
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct SimParams {
  double step_s = 1.0;
};

struct ChoiceParams {
  double theta0 = 1.0;   // cost scale, 1/min
  double beta0 = 0.15;   // commonality weight, min
  double gamma0 = 1.0;   // overlap exponent
  double vot_dollars_per_hour = 15.0;
};

struct Scenario {
  std::string name;
  Network network;
  CordonPartition cordon;
  DemandTable demand;
  SimParams sim;
  ChoiceParams choice;
  int k_paths = 8;
  double start_time_s = 0.0;  // clock offset of interval 0, for reports

  PathSet paths;  // derived; built on load, not serialized

  double horizon_s() const { return demand.horizon_s(); }
};

// ---------------------------------------------------------------------------
// Grid generator
// ---------------------------------------------------------------------------

struct GridParams {
  int rows = 8;
  int cols = 8;
  // Cordon rectangle in node coordinates, inclusive; must be strictly inside
  // the grid so a periphery ring exists.
  int cordon_row0 = 2;
  int cordon_col0 = 2;
  int cordon_row1 = 5;
  int cordon_col1 = 5;

  double link_length_km = 0.5;
  double length_jitter = 0.08;  // lengths drawn from U[1-j, 1+j] * link_length_km
  int lanes = 1;
  double free_speed_kmh = 50.0;
  double ring_speed_kmh = 62.0;  // boundary ring road; the detour route for through trips
  double capacity_vphpl = 900.0;
  double cordon_speed_kmh = 40.0;      // CBD streets inside the cordon
  double cordon_capacity_vphpl = 550.0;
  // Outbound boundary crossings (inside -> outside) are signal-constrained;
  // overloading them is what bends the cordon NFD into a congested branch.
  double gate_out_capacity_vphpl = 900.0;
  double jam_density_vpkmpl = 160.0;
  double cordon_jam_vpkmpl = 95.0;  // tighter storage downtown; drives spillback
  // Block-length asymmetry inside the cordon: links on the low-index half are
  // scaled by (1 - skew), the rest by (1 + skew). Distance-based tolls then
  // have genuinely shorter routes to concentrate on.
  double cordon_length_skew = 0.3;

  int num_intervals = 30;         // 5-min intervals; tail clears the network
  double peak_interval = 6.0;     // center of the demand peak
  double peak_width = 2.0;        // gaussian decay of the rising shoulder
  double peak_tail_width = 4.0;   // slower decay after the peak stretches the rush-hour tail
  double peak_plateau = 0.0;      // half-width of the flat top, in intervals
  double through_vph = 1000.0;    // eastbound/southbound pairs across the cordon
  double corridor_vph = 1400.0;   // one-way pairs on the rows/cols hugging the cordon
  double radial_vph = 500.0;      // gate-to-far-interior pairs ending inside the cordon
  double ring_vph = 300.0;        // corner-to-corner pairs around the boundary
  double demand_jitter = 0.1;     // per-pair multiplicative jitter

  uint64_t seed = 1;
  int k_paths = 8;
  double start_time_s = 8.0 * 3600.0;
};

Scenario generate_grid(const GridParams& params);
GridParams grid_params_from_json(const json& doc);
ordered_json grid_params_to_json(const GridParams& params);

// ---------------------------------------------------------------------------
// Loading and saving
// ---------------------------------------------------------------------------

// Parses and validates a scenario document. A document may either describe the
// network explicitly or contain a {"grid": {...}} generator block.
Scenario load_scenario(const json& doc);
Scenario load_scenario_file(const std::string& path);

// Serializes the scenario configuration (no derived state). Loading the result
// reproduces the scenario byte-identically.
ordered_json scenario_to_json(const Scenario& scenario);
void save_scenario_file(const Scenario& scenario, const std::string& path);

// Checks every structural invariant; throws ScenarioError on violation.
void validate_scenario(const Scenario& scenario);

// ---------------------------------------------------------------------------
// Route sets
// ---------------------------------------------------------------------------

// Up to k loopless shortest paths by free-flow travel time (Yen), ordered by
// (cost, lexicographic link-id sequence). Throws if dest is unreachable.
std::vector<Path> k_shortest_paths(const Network& network, int origin, int dest, int k);

PathSet build_path_set(const Network& network, const std::vector<OdPair>& od_pairs, int k);

}  // namespace nfdp
