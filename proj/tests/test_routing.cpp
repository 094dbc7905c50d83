#include <doctest.h>

#include <cmath>
#include <random>

#include "nfdp/routing.hpp"
#include "test_support.hpp"

using namespace nfdp;
using nfdp::test::make_link;

namespace {

// Three-route fixture: two overlapping two-link routes sharing their first
// link, plus a disjoint single-link route. All free speeds 60 km/h.
struct Fixture {
  Network net;
  CordonPartition cordon;
  std::vector<Path> routes;

  Fixture() {
    net.num_nodes = 3;
    net.links = {
        make_link(0, 0, 1, 2.0),  // shared stem
        make_link(1, 1, 2, 2.0),  // branch a
        make_link(2, 1, 2, 2.0),  // branch b
        make_link(3, 0, 2, 4.0),  // disjoint bypass
    };
    net.rebuild_adjacency();
    cordon.in_cordon = {0, 1, 0, 0};  // only the first branch stem piece is priced
    for (std::vector<int> links : {std::vector<int>{0, 1}, {0, 2}, {3}}) {
      Path p;
      p.links = links;
      for (int lid : links) {
        p.length_km += net.links[lid].length_km;
        p.free_flow_time_s += net.links[lid].free_flow_time_s();
      }
      routes.push_back(p);
    }
  }
};

std::vector<double> free_flow_times(const Network& net) {
  std::vector<double> t(net.links.size());
  for (size_t i = 0; i < t.size(); ++i) t[i] = net.links[i].free_flow_time_s();
  return t;
}

}  // namespace

TEST_CASE("generalized cost: 10 min path plus $1.50 toll at $15/h VOT is 16 min") {
  Network net;
  net.num_nodes = 2;
  net.links = {make_link(0, 0, 1, /*length_km=*/10.0, 1, 60.0)};  // 10 min at 60 km/h
  net.rebuild_adjacency();
  CordonPartition cordon;
  cordon.in_cordon = {1};
  Path p;
  p.links = {0};
  p.length_km = 10.0;
  p.free_flow_time_s = 600.0;

  TollSchedule sched;
  sched.model = TollModel::distance;
  sched.alpha = 0.15;  // $0.15/km * 10 km = $1.50
  sched.period_start_s = 0;
  sched.period_end_s = 3600;

  std::vector<double> times = free_flow_times(net);
  PathCost cost = generalized_cost(p, times, net, cordon, sched, 0.0, 15.0);
  CHECK(cost.time_min == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(cost.toll_dollars == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(cost.generalized_min == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("zero toll rates leave the pure travel time") {
  Fixture f;
  TollSchedule sched;
  sched.model = TollModel::jdtt;
  sched.period_start_s = 0;
  sched.period_end_s = 3600;
  std::vector<double> times = free_flow_times(f.net);
  PathCost cost = generalized_cost(f.routes[0], times, f.net, f.cordon, sched, 0.0, 15.0);
  CHECK(cost.generalized_min == doctest::Approx(cost.time_min).epsilon(1e-12));
}

TEST_CASE("JDTT with alpha=0 equals the pure time-toll cost") {
  Fixture f;
  std::vector<double> times = free_flow_times(f.net);

  TollSchedule jdtt;
  jdtt.model = TollModel::jdtt;
  jdtt.alpha = 0.0;
  jdtt.beta1 = 9.0;
  jdtt.period_start_s = 0;
  jdtt.period_end_s = 3600;

  TollSchedule time_only = jdtt;
  time_only.model = TollModel::time;

  for (const Path& p : f.routes) {
    PathCost a = generalized_cost(p, times, f.net, f.cordon, jdtt, 0.0, 15.0);
    PathCost b = generalized_cost(p, times, f.net, f.cordon, time_only, 0.0, 15.0);
    CHECK(a.generalized_min == doctest::Approx(b.generalized_min).epsilon(1e-12));
  }
}

TEST_CASE("commonality factor: disjoint equal-length routes get zero") {
  Network net;
  net.num_nodes = 2;
  net.links = {make_link(0, 0, 1, 3.0), make_link(1, 0, 1, 3.0)};
  net.rebuild_adjacency();
  std::vector<Path> routes;
  for (int lid : {0, 1}) {
    Path p;
    p.links = {lid};
    p.length_km = 3.0;
    routes.push_back(p);
  }
  auto cf = commonality_factors(routes, net, 0.15, 1.0);
  CHECK(cf[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cf[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("commonality factor: beta0 = 0 kills the factor") {
  Fixture f;
  for (double v : commonality_factors(f.routes, f.net, 0.0, 1.0)) CHECK(v == 0.0);
}

TEST_CASE("commonality factor: half overlap evaluates to beta0*ln(1 + 2^-gamma0)") {
  // three equal-length routes; r overlaps s on half of each, disjoint from the third
  Network net;
  net.num_nodes = 3;
  net.links = {
      make_link(0, 0, 1, 2.0),  // shared half
      make_link(1, 1, 2, 2.0),
      make_link(2, 1, 2, 2.0),
      make_link(3, 0, 2, 4.0),
  };
  net.rebuild_adjacency();
  std::vector<Path> routes;
  for (std::vector<int> links : {std::vector<int>{0, 1}, {0, 2}, {3}}) {
    Path p;
    p.links = links;
    for (int lid : links) p.length_km += net.links[lid].length_km;
    routes.push_back(p);
  }
  for (double gamma0 : {1.0, 2.0}) {
    const double beta0 = 0.15;
    auto cf = commonality_factors(routes, net, beta0, gamma0);
    // direct summation over Eq. terms: self 1 + (L/2 / L)^gamma0 + 0
    const double expected = beta0 * std::log(1.0 + std::pow(0.5, gamma0));
    CHECK(cf[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(cf[1] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(cf[2] == doctest::Approx(beta0 * std::log(1.0)).epsilon(1e-12));
  }
}

TEST_CASE("choice probabilities: two identical disjoint paths split evenly") {
  std::vector<double> v{12.0, 12.0}, cf{0.0, 0.0};
  auto p = choice_probabilities(v, cf, 1.0);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("choice probabilities: logistic arithmetic for V = (1, 2)") {
  std::vector<double> v{1.0, 2.0}, cf{0.0, 0.0};
  auto p = choice_probabilities(v, cf, 1.0);
  CHECK(p[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  CHECK(p[0] == doctest::Approx(0.731059).epsilon(1e-6));
}

TEST_CASE("choice probabilities: invariant to a common additive shift") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> cost(1.0, 120.0);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 2 + rng() % 6;
    std::vector<double> v(n), cf(n, 0.0);
    for (double& x : v) x = cost(rng);
    auto p = choice_probabilities(v, cf, 1.0);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> shifted = v;
    for (double& x : shifted) x += 37.5;
    auto q = choice_probabilities(shifted, cf, 1.0);
    for (size_t i = 0; i < n; ++i) CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
  }
}

TEST_CASE("C-logit with beta0 = 0 matches an independent plain-logit implementation") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> cost(1.0, 60.0);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 2 + rng() % 5;
    std::vector<double> v(n), cf(n, 0.0);
    for (double& x : v) x = cost(rng);
    const double theta0 = 0.5 + cost(rng) / 60.0;
    auto p = choice_probabilities(v, cf, theta0);
    // plain MNL, no shift trick
    double denom = 0.0;
    for (double x : v) denom += std::exp(-theta0 * x);
    for (size_t i = 0; i < n; ++i)
      CHECK(p[i] == doctest::Approx(std::exp(-theta0 * v[i]) / denom).epsilon(1e-12));
  }
}

TEST_CASE("assign_flows conserves demand exactly") {
  std::mt19937_64 rng(7);
  std::vector<double> p{0.2, 0.5, 0.3};
  CHECK(assign_flows(0, p, rng) == std::vector<int>{0, 0, 0});
  auto counts = assign_flows(257, p, rng);
  CHECK(counts[0] + counts[1] + counts[2] == 257);
}

TEST_CASE("assign_flows respects a degenerate distribution") {
  std::mt19937_64 rng(7);
  std::vector<double> p{1.0, 0.0};
  auto counts = assign_flows(50, p, rng);
  CHECK(counts == std::vector<int>{50, 0});
}

TEST_CASE("assign_flows sampling is binomial: share close to p over 20 seeds") {
  std::vector<double> p{0.7, 0.3};
  double share_sum = 0.0;
  const int q = 10000;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    auto counts = assign_flows(q, p, rng);
    share_sum += static_cast<double>(counts[0]) / q;
  }
  CHECK(share_sum / 20.0 == doctest::Approx(0.7).epsilon(0.015));
}
