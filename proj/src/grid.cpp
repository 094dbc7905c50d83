#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "nfdp/scenario.hpp"

namespace nfdp {

namespace {

int node_id(const GridParams& g, int row, int col) { return row * g.cols + col; }

bool node_in_cordon(const GridParams& g, int node) {
  int row = node / g.cols;
  int col = node % g.cols;
  return row >= g.cordon_row0 && row <= g.cordon_row1 && col >= g.cordon_col0 &&
         col <= g.cordon_col1;
}

bool node_on_boundary(const GridParams& g, int node) {
  int row = node / g.cols;
  int col = node % g.cols;
  return row == 0 || row == g.rows - 1 || col == 0 || col == g.cols - 1;
}

}  // namespace

Scenario generate_grid(const GridParams& g) {
  if (g.rows < 2 || g.cols < 2)
    throw ScenarioError("grid.rows", "grid needs at least 2x2 nodes");
  if (g.cordon_row0 > g.cordon_row1 || g.cordon_col0 > g.cordon_col1)
    throw ScenarioError("grid.cordon", "empty cordon rectangle");
  if (g.cordon_row0 < 1 || g.cordon_col0 < 1 || g.cordon_row1 > g.rows - 2 ||
      g.cordon_col1 > g.cols - 2)
    throw ScenarioError("grid.cordon",
                        "cordon rectangle touches the grid boundary; no periphery would exist");
  if (g.num_intervals < 1) throw ScenarioError("grid.num_intervals", "must be >= 1");

  std::mt19937_64 rng(g.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Scenario s;
  s.name = "grid" + std::to_string(g.rows) + "x" + std::to_string(g.cols);
  s.k_paths = g.k_paths;
  s.start_time_s = g.start_time_s;
  s.network.num_nodes = g.rows * g.cols;

  // Bidirectional links between orthogonal neighbors; one jittered length per
  // undirected edge, shared by both directions.
  const int mid_row = (g.cordon_row0 + g.cordon_row1) / 2;
  const int mid_col = (g.cordon_col0 + g.cordon_col1) / 2;
  auto add_pair = [&](int a, int b) {
    double jitter = 1.0 + g.length_jitter * (2.0 * unit(rng) - 1.0);
    // asymmetric downtown blocks: short half vs long half of the cordon
    if (node_in_cordon(g, a) && node_in_cordon(g, b)) {
      const int ra = a / g.cols, ca = a % g.cols;
      const int rb = b / g.cols, cb = b % g.cols;
      const bool horizontal = ra == rb;
      const bool short_half = horizontal ? ra <= mid_row : std::min(ca, cb) <= mid_col;
      jitter *= short_half ? 1.0 - g.cordon_length_skew : 1.0 + g.cordon_length_skew;
    }
    for (int dir = 0; dir < 2; ++dir) {
      Link link;
      link.id = static_cast<int>(s.network.links.size());
      link.from = dir == 0 ? a : b;
      link.to = dir == 0 ? b : a;
      link.length_km = g.link_length_km * jitter;
      link.lanes = g.lanes;
      const int from = dir == 0 ? a : b;
      const int to = dir == 0 ? b : a;
      const bool ring = node_on_boundary(g, a) && node_on_boundary(g, b);
      const bool inside = node_in_cordon(g, a) && node_in_cordon(g, b);
      const bool outbound_gate = node_in_cordon(g, from) && !node_in_cordon(g, to);
      link.free_speed_kmh =
          ring ? g.ring_speed_kmh : inside ? g.cordon_speed_kmh : g.free_speed_kmh;
      link.capacity_vphpl = inside           ? g.cordon_capacity_vphpl
                            : outbound_gate ? g.gate_out_capacity_vphpl
                                            : g.capacity_vphpl;
      link.jam_density_vpkmpl = inside ? g.cordon_jam_vpkmpl : g.jam_density_vpkmpl;
      s.network.links.push_back(link);
    }
  };
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      if (c + 1 < g.cols) add_pair(node_id(g, r, c), node_id(g, r, c + 1));
      if (r + 1 < g.rows) add_pair(node_id(g, r, c), node_id(g, r + 1, c));
    }

  s.cordon.in_cordon.assign(s.network.links.size(), 0);
  for (const Link& link : s.network.links)
    if (node_in_cordon(g, link.from) && node_in_cordon(g, link.to))
      s.cordon.in_cordon[link.id] = 1;

  // Demand groups. Through pairs run along the middle cordon rows/cols and
  // load the core; their route alternatives stay mostly inside the cordon.
  // Corridor pairs travel the rows/cols hugging the cordon, so their route
  // sets mix cordon-dipping and cordon-avoiding members at nearly equal cost,
  // which is the margin pricing acts on. Ring pairs keep the boundary busy.
  const int R = g.rows - 1, C = g.cols - 1;
  const int nw = node_id(g, 0, 0), ne = node_id(g, 0, C);
  const int sw = node_id(g, R, 0), se = node_id(g, R, C);
  struct Group {
    int origin, dest;
    double vph;
  };
  std::vector<Group> groups;

  // Directional peak: eastbound and southbound dominate, so saturation does
  // not assemble blocking cycles at the reference demand.
  for (int r = g.cordon_row0; r <= g.cordon_row1; ++r)
    groups.push_back({node_id(g, r, 0), node_id(g, r, C), g.through_vph});
  for (int c = g.cordon_col0; c <= g.cordon_col1; ++c)
    groups.push_back({node_id(g, 0, c), node_id(g, R, c), g.through_vph});

  // Inbound trips ending deep inside the cordon: they cannot avoid the toll
  // and respond by re-routing between the short and long halves.
  const int mid_r = (g.cordon_row0 + g.cordon_row1) / 2;
  const int mid_c = (g.cordon_col0 + g.cordon_col1) / 2;
  for (int r : {mid_r, std::min(mid_r + 1, g.cordon_row1)})
    groups.push_back({node_id(g, r, 0), node_id(g, r, g.cordon_col1), g.radial_vph});
  for (int c : {mid_c, std::min(mid_c + 1, g.cordon_col1)})
    groups.push_back({node_id(g, 0, c), node_id(g, g.cordon_row1, c), g.radial_vph});

  groups.push_back({node_id(g, g.cordon_row0 - 1, 0), node_id(g, g.cordon_row0 - 1, C),
                    g.corridor_vph});
  groups.push_back({node_id(g, g.cordon_row1 + 1, C), node_id(g, g.cordon_row1 + 1, 0),
                    g.corridor_vph});
  groups.push_back({node_id(g, 0, g.cordon_col0 - 1), node_id(g, R, g.cordon_col0 - 1),
                    g.corridor_vph});
  groups.push_back({node_id(g, R, g.cordon_col1 + 1), node_id(g, 0, g.cordon_col1 + 1),
                    g.corridor_vph});

  for (auto [a, b] : {std::pair{nw, ne}, {ne, se}, {se, sw}, {sw, nw}}) {
    groups.push_back({a, b, g.ring_vph});
    groups.push_back({b, a, g.ring_vph});
  }

  s.demand.interval_s = 300.0;
  s.demand.num_intervals = g.num_intervals;
  s.demand.multiplier = 1.0;
  for (const Group& grp : groups) {
    double jitter = 1.0 + g.demand_jitter * (2.0 * unit(rng) - 1.0);
    std::vector<double> per_interval(g.num_intervals, 0.0);
    for (int h = 0; h < g.num_intervals; ++h) {
      const double d = std::abs(h - g.peak_interval) - g.peak_plateau;
      double w = 1.0;
      if (d > 0) {
        const double width = h < g.peak_interval ? g.peak_width : g.peak_tail_width;
        const double z = d / width;
        w = std::exp(-0.5 * z * z);
      }
      if (w < 0.01) w = 0.0;  // clean tail so the network fully unloads
      per_interval[h] = grp.vph * w * jitter * s.demand.interval_s / 3600.0;
    }
    s.demand.od.push_back({grp.origin, grp.dest});
    s.demand.demand.push_back(std::move(per_interval));
    int nodes[2] = {grp.origin, grp.dest};
    for (int n : nodes)
      if (std::find(s.network.centroids.begin(), s.network.centroids.end(), n) ==
          s.network.centroids.end())
        s.network.centroids.push_back(n);
  }
  std::sort(s.network.centroids.begin(), s.network.centroids.end());

  s.network.rebuild_adjacency();
  validate_scenario(s);
  s.paths = build_path_set(s.network, s.demand.od, s.k_paths);
  return s;
}

GridParams grid_params_from_json(const json& doc) {
  GridParams g;
  g.rows = doc.value("rows", g.rows);
  g.cols = doc.value("cols", g.cols);
  if (doc.contains("cordon")) {
    const json& c = doc.at("cordon");
    if (!c.is_array() || c.size() != 4)
      throw ScenarioError("grid.cordon", "expected [row0, col0, row1, col1]");
    g.cordon_row0 = c[0].get<int>();
    g.cordon_col0 = c[1].get<int>();
    g.cordon_row1 = c[2].get<int>();
    g.cordon_col1 = c[3].get<int>();
  }
  g.link_length_km = doc.value("link_length_km", g.link_length_km);
  g.length_jitter = doc.value("length_jitter", g.length_jitter);
  g.lanes = doc.value("lanes", g.lanes);
  g.free_speed_kmh = doc.value("free_speed_kmh", g.free_speed_kmh);
  g.ring_speed_kmh = doc.value("ring_speed_kmh", g.ring_speed_kmh);
  g.cordon_speed_kmh = doc.value("cordon_speed_kmh", g.cordon_speed_kmh);
  g.cordon_capacity_vphpl = doc.value("cordon_capacity_vphpl", g.cordon_capacity_vphpl);
  g.gate_out_capacity_vphpl = doc.value("gate_out_capacity_vphpl", g.gate_out_capacity_vphpl);
  g.cordon_jam_vpkmpl = doc.value("cordon_jam_vpkmpl", g.cordon_jam_vpkmpl);
  g.cordon_length_skew = doc.value("cordon_length_skew", g.cordon_length_skew);
  g.capacity_vphpl = doc.value("capacity_vphpl", g.capacity_vphpl);
  g.jam_density_vpkmpl = doc.value("jam_density_vpkmpl", g.jam_density_vpkmpl);
  g.num_intervals = doc.value("num_intervals", g.num_intervals);
  g.peak_interval = doc.value("peak_interval", g.peak_interval);
  g.peak_width = doc.value("peak_width", g.peak_width);
  g.peak_plateau = doc.value("peak_plateau", g.peak_plateau);
  g.peak_tail_width = doc.value("peak_tail_width", g.peak_tail_width);
  g.through_vph = doc.value("through_vph", g.through_vph);
  g.radial_vph = doc.value("radial_vph", g.radial_vph);
  g.corridor_vph = doc.value("corridor_vph", g.corridor_vph);
  g.ring_vph = doc.value("ring_vph", g.ring_vph);
  g.demand_jitter = doc.value("demand_jitter", g.demand_jitter);
  g.seed = doc.value("seed", g.seed);
  g.k_paths = doc.value("k_paths", g.k_paths);
  g.start_time_s = doc.value("start_time_s", g.start_time_s);
  return g;
}

ordered_json grid_params_to_json(const GridParams& g) {
  return ordered_json{{"rows", g.rows},
                      {"cols", g.cols},
                      {"cordon", {g.cordon_row0, g.cordon_col0, g.cordon_row1, g.cordon_col1}},
                      {"link_length_km", g.link_length_km},
                      {"length_jitter", g.length_jitter},
                      {"lanes", g.lanes},
                      {"free_speed_kmh", g.free_speed_kmh},
                      {"ring_speed_kmh", g.ring_speed_kmh},
                      {"cordon_speed_kmh", g.cordon_speed_kmh},
                      {"cordon_capacity_vphpl", g.cordon_capacity_vphpl},
                      {"gate_out_capacity_vphpl", g.gate_out_capacity_vphpl},
                      {"cordon_jam_vpkmpl", g.cordon_jam_vpkmpl},
                      {"cordon_length_skew", g.cordon_length_skew},
                      {"capacity_vphpl", g.capacity_vphpl},
                      {"jam_density_vpkmpl", g.jam_density_vpkmpl},
                      {"num_intervals", g.num_intervals},
                      {"peak_interval", g.peak_interval},
                      {"peak_width", g.peak_width},
                      {"peak_plateau", g.peak_plateau},
                      {"peak_tail_width", g.peak_tail_width},
                      {"through_vph", g.through_vph},
                      {"radial_vph", g.radial_vph},
                      {"corridor_vph", g.corridor_vph},
                      {"ring_vph", g.ring_vph},
                      {"demand_jitter", g.demand_jitter},
                      {"seed", g.seed},
                      {"k_paths", g.k_paths},
                      {"start_time_s", g.start_time_s}};
}

}  // namespace nfdp
