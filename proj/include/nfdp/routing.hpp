#pragma once

#include <random>
#include <span>
#include <vector>

#include "nfdp/scenario.hpp"
#include "nfdp/tolling.hpp"

namespace nfdp {

// ---------------------------------------------------------------------------
// C-logit route choice
// ---------------------------------------------------------------------------

// Commonality factors (minutes) for every path of one OD pair. The overlap sum
// includes the self term, so CF >= 0 and stays finite for disjoint paths.
// "Length" is physical km, so factors are computed once per path set.
std::vector<double> commonality_factors(const std::vector<Path>& routes, const Network& network,
                                        double beta0, double gamma0);

// Pairwise common length (km) of two paths: sum of lengths of shared links.
double common_length_km(const Path& a, const Path& b, const Network& network);

struct PathCost {
  double time_min = 0.0;         // in-network travel time
  double toll_dollars = 0.0;     // active toll components
  double generalized_min = 0.0;  // V = time + toll/VOT
};

// Generalized travel cost of a path given per-link travel times (seconds) and
// the toll schedule evaluated at eval_time_s.
PathCost generalized_cost(const Path& path, std::span<const double> link_time_s,
                          const Network& network, const CordonPartition& cordon,
                          const TollSchedule& schedule, double eval_time_s,
                          double vot_dollars_per_hour);

// p_r = exp[theta0 * (-V_r - CF_r)] / sum_s exp[theta0 * (-V_s - CF_s)],
// computed with a max shift. Throws on an empty path set.
std::vector<double> choice_probabilities(std::span<const double> generalized_min,
                                         std::span<const double> cf_min, double theta0);

// Samples one path index from the probability vector.
int sample_path(std::span<const double> probabilities, std::mt19937_64& rng);

// Assigns `demand` vehicles to paths by independent sampling; the returned
// counts sum to `demand` exactly.
std::vector<int> assign_flows(int demand, std::span<const double> probabilities,
                              std::mt19937_64& rng);

}  // namespace nfdp
