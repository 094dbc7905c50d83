#include "nfdp/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nfdp {

double common_length_km(const Path& a, const Path& b, const Network& network) {
  std::vector<int> la = a.links, lb = b.links;
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  double km = 0.0;
  size_t i = 0, j = 0;
  while (i < la.size() && j < lb.size()) {
    if (la[i] == lb[j]) {
      km += network.links[la[i]].length_km;
      ++i;
      ++j;
    } else if (la[i] < lb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return km;
}

std::vector<double> commonality_factors(const std::vector<Path>& routes, const Network& network,
                                        double beta0, double gamma0) {
  std::vector<double> cf(routes.size(), 0.0);
  if (beta0 == 0.0) return cf;
  for (size_t r = 0; r < routes.size(); ++r) {
    double sum = 0.0;
    for (size_t s = 0; s < routes.size(); ++s) {
      // self term contributes exactly 1, keeping the log argument >= 1
      double overlap = s == r ? routes[r].length_km
                              : common_length_km(routes[r], routes[s], network);
      double denom = std::sqrt(routes[r].length_km) * std::sqrt(routes[s].length_km);
      sum += std::pow(overlap / denom, gamma0);
    }
    cf[r] = beta0 * std::log(sum);
  }
  return cf;
}

PathCost generalized_cost(const Path& path, std::span<const double> link_time_s,
                          const Network& network, const CordonPartition& cordon,
                          const TollSchedule& schedule, double eval_time_s,
                          double vot_dollars_per_hour) {
  PathCost cost;
  double seconds = 0.0;
  for (int lid : path.links) seconds += link_time_s[lid];
  cost.time_min = seconds / 60.0;
  cost.toll_dollars =
      toll_components(path, link_time_s, network, cordon, schedule, eval_time_s).total();
  cost.generalized_min = cost.time_min + cost.toll_dollars / vot_dollars_per_hour * 60.0;
  return cost;
}

std::vector<double> choice_probabilities(std::span<const double> generalized_min,
                                         std::span<const double> cf_min, double theta0) {
  if (generalized_min.empty())
    throw std::invalid_argument("choice_probabilities: empty path set");
  const size_t n = generalized_min.size();
  std::vector<double> utility(n);
  double best = -std::numeric_limits<double>::infinity();
  for (size_t r = 0; r < n; ++r) {
    utility[r] = theta0 * (-generalized_min[r] - cf_min[r]);
    best = std::max(best, utility[r]);
  }
  std::vector<double> p(n);
  double denom = 0.0;
  for (size_t r = 0; r < n; ++r) {
    p[r] = std::exp(utility[r] - best);
    denom += p[r];
  }
  for (double& v : p) v /= denom;
  return p;
}

int sample_path(std::span<const double> probabilities, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  double cum = 0.0;
  for (size_t r = 0; r < probabilities.size(); ++r) {
    cum += probabilities[r];
    if (u < cum) return static_cast<int>(r);
  }
  return static_cast<int>(probabilities.size()) - 1;  // guard against rounding
}

std::vector<int> assign_flows(int demand, std::span<const double> probabilities,
                              std::mt19937_64& rng) {
  std::vector<int> counts(probabilities.size(), 0);
  for (int i = 0; i < demand; ++i) counts[sample_path(probabilities, rng)]++;
  return counts;
}

}  // namespace nfdp
