#include "nfdp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

namespace nfdp {

void Network::rebuild_adjacency() {
  out_links.assign(num_nodes, {});
  in_links.assign(num_nodes, {});
  for (const Link& link : links) {
    out_links[link.from].push_back(link.id);
    in_links[link.to].push_back(link.id);
  }
  // links are stored by ascending id, so adjacency lists stay sorted
}

int CordonPartition::count() const {
  int n = 0;
  for (char c : in_cordon) n += c ? 1 : 0;
  return n;
}

std::vector<int> CordonPartition::cordon_links() const {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(in_cordon.size()); ++i)
    if (in_cordon[i]) ids.push_back(i);
  return ids;
}

std::vector<int> CordonPartition::periphery_links() const {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(in_cordon.size()); ++i)
    if (!in_cordon[i]) ids.push_back(i);
  return ids;
}

std::vector<int> CordonPartition::all_links() const {
  std::vector<int> ids(in_cordon.size());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

namespace {

const json& require(const json& doc, const char* key, const std::string& path) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ScenarioError(path + "." + key, "missing field");
  return *it;
}

double require_number(const json& doc, const char* key, const std::string& path) {
  const json& v = require(doc, key, path);
  if (!v.is_number()) throw ScenarioError(path + "." + key, "expected a number");
  return v.get<double>();
}

int require_int(const json& doc, const char* key, const std::string& path) {
  const json& v = require(doc, key, path);
  if (!v.is_number_integer()) throw ScenarioError(path + "." + key, "expected an integer");
  return v.get<int>();
}

double number_or(const json& doc, const char* key, double fallback) {
  auto it = doc.find(key);
  return it == doc.end() ? fallback : it->get<double>();
}

int int_or(const json& doc, const char* key, int fallback) {
  auto it = doc.find(key);
  return it == doc.end() ? fallback : it->get<int>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void validate_scenario(const Scenario& scenario) {
  const Network& net = scenario.network;
  if (net.num_nodes < 1) throw ScenarioError("network.num_nodes", "need at least one node");

  for (size_t i = 0; i < net.links.size(); ++i) {
    const Link& link = net.links[i];
    const std::string path = "network.links[" + std::to_string(i) + "]";
    if (link.id != static_cast<int>(i))
      throw ScenarioError(path + ".id", "link ids must be 0..n-1 in order");
    if (link.from < 0 || link.from >= net.num_nodes)
      throw ScenarioError(path + ".from", "node does not exist");
    if (link.to < 0 || link.to >= net.num_nodes)
      throw ScenarioError(path + ".to", "node does not exist");
    if (!(link.length_km > 0)) throw ScenarioError(path + ".length_km", "must be > 0");
    if (link.lanes < 1) throw ScenarioError(path + ".lanes", "must be >= 1");
    if (!(link.free_speed_kmh > 0))
      throw ScenarioError(path + ".free_speed_kmh", "must be > 0");
    if (!(link.capacity_vphpl > 0))
      throw ScenarioError(path + ".capacity_vphpl", "must be > 0");
    if (!(link.jam_density_vpkmpl > link.capacity_vphpl / link.free_speed_kmh))
      throw ScenarioError(path + ".jam_density_vpkmpl",
                          "must exceed capacity/free-flow-speed for a feasible triangular "
                          "fundamental diagram");
  }

  // weak connectivity over the undirected skeleton
  if (!net.links.empty()) {
    std::vector<int> comp(net.num_nodes, -1);
    std::vector<int> stack{net.links[0].from};
    comp[net.links[0].from] = 0;
    std::vector<std::vector<int>> undirected(net.num_nodes);
    for (const Link& l : net.links) {
      undirected[l.from].push_back(l.to);
      undirected[l.to].push_back(l.from);
    }
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : undirected[u])
        if (comp[v] == -1) {
          comp[v] = 0;
          stack.push_back(v);
        }
    }
    for (int n = 0; n < net.num_nodes; ++n)
      if (comp[n] == -1)
        throw ScenarioError("network", "graph is not weakly connected (node " +
                                           std::to_string(n) + " unreachable)");
  }

  if (scenario.cordon.in_cordon.size() != net.links.size())
    throw ScenarioError("cordon_links", "partition must cover exactly the link set");
  if (scenario.cordon.count() == 0)
    throw ScenarioError("cordon_links", "cordon link set must be non-empty");

  for (size_t c = 0; c < net.centroids.size(); ++c) {
    int node = net.centroids[c];
    if (node < 0 || node >= net.num_nodes)
      throw ScenarioError("network.centroids[" + std::to_string(c) + "]",
                          "node does not exist");
  }

  // every centroid is connected to at least one other centroid, in either
  // direction (a destination-only centroid need not have outgoing links)
  for (int c : net.centroids) {
    auto connected = [&](bool forward) {
      std::vector<char> seen(net.num_nodes, 0);
      std::queue<int> bfs;
      bfs.push(c);
      seen[c] = 1;
      while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop();
        for (int lid : forward ? net.out_links[u] : net.in_links[u]) {
          int v = forward ? net.links[lid].to : net.links[lid].from;
          if (seen[v]) continue;
          seen[v] = 1;
          if (std::find(net.centroids.begin(), net.centroids.end(), v) !=
              net.centroids.end())
            return true;
          bfs.push(v);
        }
      }
      return false;
    };
    if (net.centroids.size() > 1 && !connected(true) && !connected(false))
      throw ScenarioError("network.centroids", "centroid " + std::to_string(c) +
                                                   " is connected to no other centroid");
  }

  const DemandTable& dem = scenario.demand;
  if (dem.num_intervals < 1) throw ScenarioError("demand.num_intervals", "must be >= 1");
  if (!(dem.interval_s > 0)) throw ScenarioError("demand.interval_s", "must be > 0");
  if (dem.multiplier < 0) throw ScenarioError("demand.multiplier", "must be >= 0");
  if (dem.demand.size() != dem.od.size())
    throw ScenarioError("demand.od", "demand rows must match od pairs");
  for (size_t i = 0; i < dem.od.size(); ++i) {
    const std::string path = "demand.od[" + std::to_string(i) + "]";
    const OdPair& od = dem.od[i];
    if (od.origin < 0 || od.origin >= net.num_nodes)
      throw ScenarioError(path + ".origin", "node does not exist");
    if (od.dest < 0 || od.dest >= net.num_nodes)
      throw ScenarioError(path + ".dest", "node does not exist");
    if (od.origin == od.dest)
      throw ScenarioError(path, "origin and destination must differ");
    if (dem.demand[i].size() != static_cast<size_t>(dem.num_intervals))
      throw ScenarioError(path + ".per_interval", "must have num_intervals entries");
    for (size_t h = 0; h < dem.demand[i].size(); ++h)
      if (dem.demand[i][h] < 0)
        throw ScenarioError(path + ".per_interval[" + std::to_string(h) + "]",
                            "demand must be >= 0");
  }

  if (scenario.k_paths < 1) throw ScenarioError("k_paths", "must be >= 1");
  if (!(scenario.sim.step_s > 0)) throw ScenarioError("sim.step_s", "must be > 0");
  double steps = dem.interval_s / scenario.sim.step_s;
  if (std::abs(steps - std::llround(steps)) > 1e-9)
    throw ScenarioError("sim.step_s", "must divide the measurement interval");

  const ChoiceParams& cp = scenario.choice;
  if (!(cp.theta0 > 0)) throw ScenarioError("choice.theta0", "must be > 0");
  if (cp.beta0 < 0) throw ScenarioError("choice.beta0", "must be >= 0");
  if (!(cp.gamma0 > 0)) throw ScenarioError("choice.gamma0", "must be > 0");
  if (!(cp.vot_dollars_per_hour > 0)) throw ScenarioError("choice.vot", "must be > 0");
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

ordered_json scenario_to_json(const Scenario& scenario) {
  ordered_json doc;
  doc["name"] = scenario.name;
  doc["start_time_s"] = scenario.start_time_s;
  doc["k_paths"] = scenario.k_paths;
  doc["sim"] = ordered_json{{"step_s", scenario.sim.step_s}};
  doc["choice"] = ordered_json{{"theta0", scenario.choice.theta0},
                               {"beta0", scenario.choice.beta0},
                               {"gamma0", scenario.choice.gamma0},
                               {"vot_dollars_per_hour", scenario.choice.vot_dollars_per_hour}};

  ordered_json links = ordered_json::array();
  for (const Link& l : scenario.network.links) {
    links.push_back(ordered_json{{"id", l.id},
                                 {"from", l.from},
                                 {"to", l.to},
                                 {"length_km", l.length_km},
                                 {"lanes", l.lanes},
                                 {"free_speed_kmh", l.free_speed_kmh},
                                 {"capacity_vphpl", l.capacity_vphpl},
                                 {"jam_density_vpkmpl", l.jam_density_vpkmpl}});
  }
  doc["network"] = ordered_json{{"num_nodes", scenario.network.num_nodes},
                                {"centroids", scenario.network.centroids},
                                {"links", std::move(links)}};

  doc["cordon_links"] = scenario.cordon.cordon_links();

  ordered_json od = ordered_json::array();
  for (size_t i = 0; i < scenario.demand.od.size(); ++i) {
    od.push_back(ordered_json{{"origin", scenario.demand.od[i].origin},
                              {"dest", scenario.demand.od[i].dest},
                              {"per_interval", scenario.demand.demand[i]}});
  }
  doc["demand"] = ordered_json{{"interval_s", scenario.demand.interval_s},
                               {"num_intervals", scenario.demand.num_intervals},
                               {"multiplier", scenario.demand.multiplier},
                               {"od", std::move(od)}};
  return doc;
}

Scenario load_scenario(const json& doc) {
  if (doc.contains("grid")) return generate_grid(grid_params_from_json(doc.at("grid")));

  Scenario s;
  s.name = doc.value("name", std::string{});
  s.start_time_s = number_or(doc, "start_time_s", 0.0);
  s.k_paths = int_or(doc, "k_paths", 8);
  if (doc.contains("sim")) s.sim.step_s = number_or(doc.at("sim"), "step_s", 1.0);
  if (doc.contains("choice")) {
    const json& cp = doc.at("choice");
    s.choice.theta0 = number_or(cp, "theta0", 1.0);
    s.choice.beta0 = number_or(cp, "beta0", 0.15);
    s.choice.gamma0 = number_or(cp, "gamma0", 1.0);
    s.choice.vot_dollars_per_hour = number_or(cp, "vot_dollars_per_hour", 15.0);
  }

  const json& net = require(doc, "network", "");
  s.network.num_nodes = require_int(net, "num_nodes", "network");
  if (net.contains("centroids"))
    s.network.centroids = net.at("centroids").get<std::vector<int>>();
  const json& links = require(net, "links", "network");
  for (size_t i = 0; i < links.size(); ++i) {
    const json& l = links[i];
    const std::string path = "network.links[" + std::to_string(i) + "]";
    Link link;
    link.id = require_int(l, "id", path);
    link.from = require_int(l, "from", path);
    link.to = require_int(l, "to", path);
    link.length_km = require_number(l, "length_km", path);
    link.lanes = require_int(l, "lanes", path);
    link.free_speed_kmh = require_number(l, "free_speed_kmh", path);
    link.capacity_vphpl = require_number(l, "capacity_vphpl", path);
    link.jam_density_vpkmpl = require_number(l, "jam_density_vpkmpl", path);
    s.network.links.push_back(link);
  }

  s.cordon.in_cordon.assign(s.network.links.size(), 0);
  for (const json& id : require(doc, "cordon_links", "")) {
    int lid = id.get<int>();
    if (lid < 0 || lid >= static_cast<int>(s.network.links.size()))
      throw ScenarioError("cordon_links", "link " + std::to_string(lid) + " does not exist");
    s.cordon.in_cordon[lid] = 1;
  }

  const json& dem = require(doc, "demand", "");
  s.demand.interval_s = number_or(dem, "interval_s", 300.0);
  s.demand.num_intervals = require_int(dem, "num_intervals", "demand");
  s.demand.multiplier = number_or(dem, "multiplier", 1.0);
  if (dem.contains("od")) {
    for (size_t i = 0; i < dem.at("od").size(); ++i) {
      const json& row = dem.at("od")[i];
      const std::string path = "demand.od[" + std::to_string(i) + "]";
      OdPair od{require_int(row, "origin", path), require_int(row, "dest", path)};
      s.demand.od.push_back(od);
      s.demand.demand.push_back(require(row, "per_interval", path).get<std::vector<double>>());
    }
  }

  // endpoint ranges must hold before adjacency can be built
  for (size_t i = 0; i < s.network.links.size(); ++i) {
    const Link& l = s.network.links[i];
    if (l.from < 0 || l.from >= s.network.num_nodes)
      throw ScenarioError("network.links[" + std::to_string(i) + "].from",
                          "node does not exist");
    if (l.to < 0 || l.to >= s.network.num_nodes)
      throw ScenarioError("network.links[" + std::to_string(i) + "].to",
                          "node does not exist");
  }
  s.network.rebuild_adjacency();
  validate_scenario(s);
  s.paths = build_path_set(s.network, s.demand.od, s.k_paths);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("", "cannot open scenario file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("", "parse failure in " + path + ": " + e.what());
  }
  return load_scenario(doc);
}

void save_scenario_file(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("", "cannot write scenario file: " + path);
  out << scenario_to_json(scenario).dump(2) << "\n";
}

}  // namespace nfdp
