#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

#include "nfdp/scenario.hpp"

namespace nfdp {

namespace {

// Dijkstra by free-flow time, honoring banned nodes/links. Returns the link
// sequence origin->dest, or false if unreachable.
bool shortest_path(const Network& net, int origin, int dest,
                   const std::vector<char>& banned_node, const std::vector<char>& banned_link,
                   std::vector<int>& links_out, double& cost_out) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(net.num_nodes, kInf);
  std::vector<int> parent_link(net.num_nodes, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[origin] = 0.0;
  pq.emplace(0.0, origin);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d != dist[u]) continue;
    if (u == dest) break;
    for (int lid : net.out_links[u]) {
      if (banned_link[lid]) continue;
      const Link& l = net.links[lid];
      if (banned_node[l.to]) continue;
      double nd = d + l.free_flow_time_s();
      if (nd < dist[l.to]) {
        dist[l.to] = nd;
        parent_link[l.to] = lid;
        pq.emplace(nd, l.to);
      }
    }
  }
  if (dist[dest] == kInf) return false;
  links_out.clear();
  for (int node = dest; node != origin;) {
    int lid = parent_link[node];
    links_out.push_back(lid);
    node = net.links[lid].from;
  }
  std::reverse(links_out.begin(), links_out.end());
  cost_out = dist[dest];
  return true;
}

Path make_path(const Network& net, std::vector<int> links) {
  Path p;
  p.links = std::move(links);
  for (int lid : p.links) {
    p.length_km += net.links[lid].length_km;
    p.free_flow_time_s += net.links[lid].free_flow_time_s();
  }
  return p;
}

struct Candidate {
  double cost;
  std::vector<int> links;
  bool operator<(const Candidate& o) const {
    if (cost != o.cost) return cost < o.cost;
    return links < o.links;
  }
};

}  // namespace

std::vector<Path> k_shortest_paths(const Network& net, int origin, int dest, int k) {
  if (k < 1) throw std::invalid_argument("k_shortest_paths: k must be >= 1");
  if (origin == dest) throw std::invalid_argument("k_shortest_paths: origin == dest");

  std::vector<char> no_nodes(net.num_nodes, 0);
  std::vector<char> no_links(net.links.size(), 0);

  std::vector<Candidate> accepted;
  std::vector<int> first;
  double first_cost;
  if (!shortest_path(net, origin, dest, no_nodes, no_links, first, first_cost))
    throw std::runtime_error("k_shortest_paths: destination " + std::to_string(dest) +
                             " unreachable from " + std::to_string(origin));
  accepted.push_back({first_cost, std::move(first)});

  // canonical front-to-back cost, so duplicate discoveries compare equal
  auto path_cost = [&net](const std::vector<int>& links) {
    double c = 0.0;
    for (int lid : links) c += net.links[lid].free_flow_time_s();
    return c;
  };

  std::set<Candidate> candidates;
  while (static_cast<int>(accepted.size()) < k) {
    const Candidate prev = accepted.back();  // deviate from the last accepted path
    std::vector<char> banned_node(net.num_nodes, 0);
    std::vector<int> root;
    for (size_t spur = 0; spur < prev.links.size(); ++spur) {
      int spur_node = spur == 0 ? origin : net.links[prev.links[spur - 1]].to;
      std::vector<char> banned_link(net.links.size(), 0);
      // ban the next edge of every accepted path sharing this root
      for (const Candidate& cand : accepted) {
        if (cand.links.size() < spur + 1) continue;
        if (!std::equal(root.begin(), root.end(), cand.links.begin())) continue;
        banned_link[cand.links[spur]] = 1;
      }
      std::vector<int> spur_links;
      double spur_cost;
      if (shortest_path(net, spur_node, dest, banned_node, banned_link, spur_links,
                        spur_cost)) {
        Candidate cand;
        cand.links = root;
        cand.links.insert(cand.links.end(), spur_links.begin(), spur_links.end());
        cand.cost = path_cost(cand.links);
        candidates.insert(std::move(cand));
      }
      // the spur node joins the banned set for the next deviation point
      banned_node[spur_node] = 1;
      root.push_back(prev.links[spur]);
    }
    if (candidates.empty()) break;
    accepted.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }

  // deterministic ordering: (free-flow time, lexicographic link-id sequence)
  std::sort(accepted.begin(), accepted.end());
  std::vector<Path> paths;
  paths.reserve(accepted.size());
  for (Candidate& cand : accepted) paths.push_back(make_path(net, std::move(cand.links)));
  return paths;
}

PathSet build_path_set(const Network& net, const std::vector<OdPair>& od_pairs, int k) {
  PathSet set;
  set.routes.reserve(od_pairs.size());
  for (const OdPair& od : od_pairs)
    set.routes.push_back(k_shortest_paths(net, od.origin, od.dest, k));
  return set;
}

}  // namespace nfdp
