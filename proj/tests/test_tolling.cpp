#include <doctest.h>

#include <random>

#include "nfdp/tolling.hpp"
#include "test_support.hpp"

using namespace nfdp;
using nfdp::test::make_link;

namespace {

// Path crossing the cordon: links 0 (outside), 1 and 2 (inside), 3 (outside).
struct Fixture {
  Network net;
  CordonPartition cordon;
  Path path;

  Fixture() {
    net.num_nodes = 5;
    net.links = {
        make_link(0, 0, 1, 1.0, 1, 60.0),
        make_link(1, 1, 2, 0.5, 1, 30.0),  // in cordon; free-flow 60 s
        make_link(2, 2, 3, 0.7, 1, 42.0),  // in cordon; free-flow 60 s
        make_link(3, 3, 4, 1.0, 1, 60.0),
    };
    net.rebuild_adjacency();
    cordon.in_cordon = {0, 1, 1, 0};
    path.links = {0, 1, 2, 3};
    for (int lid : path.links) {
      path.length_km += net.links[lid].length_km;
      path.free_flow_time_s += net.links[lid].free_flow_time_s();
    }
  }

  std::vector<double> free_flow_times() const {
    std::vector<double> t(net.links.size());
    for (size_t i = 0; i < t.size(); ++i) t[i] = net.links[i].free_flow_time_s();
    return t;
  }
};

TollSchedule active_schedule(TollModel model) {
  TollSchedule s;
  s.model = model;
  s.period_start_s = 0;
  s.period_end_s = 7200;
  return s;
}

}  // namespace

TEST_CASE("cordon distance: outside-only, mixed, and inside-only paths") {
  Fixture f;
  Path outside;
  outside.links = {0, 3};
  outside.length_km = 2.0;
  CHECK(path_cordon_distance_km(outside, f.net, f.cordon) == 0.0);

  CHECK(path_cordon_distance_km(f.path, f.net, f.cordon) ==
        doctest::Approx(1.2).epsilon(1e-12));

  Path inside;
  inside.links = {1, 2};
  inside.length_km = 1.2;
  CHECK(path_cordon_distance_km(inside, f.net, f.cordon) ==
        doctest::Approx(inside.length_km).epsilon(1e-12));
}

TEST_CASE("cordon time and delay") {
  Fixture f;
  std::vector<double> times = f.free_flow_times();

  // all links at free flow: delay 0, time = in-cordon free-flow time
  CHECK(path_cordon_delay_h(f.path, times, f.net, f.cordon) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(path_cordon_time_h(f.path, times, f.cordon) ==
        doctest::Approx(120.0 / 3600.0).epsilon(1e-12));

  // one in-cordon link congested to 120 s against 60 s free flow: 60 s delay
  times[1] = 120.0;
  CHECK(path_cordon_delay_h(f.path, times, f.net, f.cordon) ==
        doctest::Approx(1.0 / 60.0).epsilon(1e-12));

  Path outside;
  outside.links = {0, 3};
  CHECK(path_cordon_time_h(outside, times, f.cordon) == 0.0);
  CHECK(path_cordon_delay_h(outside, times, f.net, f.cordon) == 0.0);
}

TEST_CASE("toll components: distance and time arithmetic") {
  Fixture f;
  std::vector<double> times = f.free_flow_times();

  TollSchedule dist = active_schedule(TollModel::distance);
  dist.alpha = 1.05;
  TollComponents c = toll_components(f.path, times, f.net, f.cordon, dist, 600.0);
  CHECK(c.distance_dollars == doctest::Approx(1.26).epsilon(1e-12));
  CHECK(c.total() == doctest::Approx(1.26).epsilon(1e-12));

  // 0.1 h in cordon at 9 $/h
  times[1] = 180.0;
  times[2] = 180.0;
  TollSchedule time_toll = active_schedule(TollModel::time);
  time_toll.beta1 = 9.0;
  c = toll_components(f.path, times, f.net, f.cordon, time_toll, 600.0);
  CHECK(c.time_dollars == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("toll components vanish outside the tolling period") {
  Fixture f;
  std::vector<double> times = f.free_flow_times();
  TollSchedule sched = active_schedule(TollModel::jdtt);
  sched.alpha = 1.0;
  sched.beta1 = 9.0;
  sched.period_start_s = 1800;
  sched.period_end_s = 3600;
  CHECK(toll_components(f.path, times, f.net, f.cordon, sched, 600.0).total() == 0.0);
  CHECK(toll_components(f.path, times, f.net, f.cordon, sched, 3600.0).total() == 0.0);
  CHECK(toll_components(f.path, times, f.net, f.cordon, sched, 1800.0).total() > 0.0);
}

TEST_CASE("trip settlement: no cordon contact means no charge") {
  Fixture f;
  TollSchedule sched = active_schedule(TollModel::distance);
  sched.alpha = 0.5;
  TripTollMeter meter;
  meter.on_link_exit(f.net.links[0], false, 0.0, 60.0, sched);
  meter.on_link_exit(f.net.links[3], false, 60.0, 120.0, sched);
  CHECK(meter.total() == 0.0);
}

TEST_CASE("trip settlement: cordon fee charged once per trip") {
  Fixture f;
  TollSchedule sched = active_schedule(TollModel::cordon);
  sched.cordon_fee = 1.9;
  TripTollMeter meter;
  meter.on_cordon_entry(100.0, sched);
  meter.on_cordon_entry(900.0, sched);  // re-entry within the same trip is free
  CHECK(meter.total() == doctest::Approx(1.9).epsilon(1e-12));
}

TEST_CASE("trip settlement: distance charge accumulates per traversed km") {
  Fixture f;
  TollSchedule sched = active_schedule(TollModel::distance);
  sched.alpha = 0.5;
  TripTollMeter meter;
  // 2.0 in-cordon km traversed as 4 half-km pieces
  Link piece = make_link(9, 0, 1, 0.5);
  for (int i = 0; i < 4; ++i)
    meter.on_link_exit(piece, true, i * 60.0, i * 60.0 + 60.0, sched);
  CHECK(meter.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trip settlement: a link counts only if its traversal ends in-period") {
  Fixture f;
  TollSchedule sched = active_schedule(TollModel::distance);
  sched.alpha = 1.0;
  sched.period_start_s = 1000;
  sched.period_end_s = 2000;
  TripTollMeter meter;
  meter.on_link_exit(f.net.links[1], true, 900.0, 990.0, sched);    // ends before start
  CHECK(meter.total() == 0.0);
  meter.on_link_exit(f.net.links[1], true, 950.0, 1100.0, sched);   // straddles the start
  CHECK(meter.total() == doctest::Approx(0.5).epsilon(1e-12));
  meter.on_link_exit(f.net.links[2], true, 1900.0, 2000.0, sched);  // ends at the boundary
  CHECK(meter.total() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("link-additivity: path components equal the sum over links") {
  Fixture f;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> extra(0.0, 120.0);
  for (TollModel model : {TollModel::distance, TollModel::time, TollModel::delay,
                          TollModel::jdtt, TollModel::jddt}) {
    TollSchedule sched = active_schedule(model);
    sched.alpha = 1.05;
    sched.beta1 = 9.0;
    sched.beta2 = 9.0;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> times = f.free_flow_times();
      for (double& t : times) t += extra(rng);
      TollComponents whole = toll_components(f.path, times, f.net, f.cordon, sched, 60.0);
      double link_sum = 0.0;
      for (int lid : f.path.links) {
        Path single;
        single.links = {lid};
        single.length_km = f.net.links[lid].length_km;
        link_sum += toll_components(single, times, f.net, f.cordon, sched, 60.0).total();
      }
      CHECK(whole.total() == doctest::Approx(link_sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("monotonicity in rates and in congestion") {
  Fixture f;
  std::vector<double> times = f.free_flow_times();
  TollSchedule sched = active_schedule(TollModel::jdtt);
  sched.alpha = 0.5;
  sched.beta1 = 5.0;
  double base = toll_components(f.path, times, f.net, f.cordon, sched, 60.0).total();
  sched.alpha = 0.7;
  double more_alpha = toll_components(f.path, times, f.net, f.cordon, sched, 60.0).total();
  CHECK(more_alpha >= base);
  times[1] += 300.0;
  double more_time = toll_components(f.path, times, f.net, f.cordon, sched, 60.0).total();
  CHECK(more_time >= more_alpha);
}

TEST_CASE("reduction: jdtt with beta1=0 and jddt with beta2=0 settle like distance") {
  Fixture f;
  TollSchedule dist = active_schedule(TollModel::distance);
  dist.alpha = 0.8;
  TollSchedule jdtt = active_schedule(TollModel::jdtt);
  jdtt.alpha = 0.8;
  jdtt.beta1 = 0.0;
  TollSchedule jddt = active_schedule(TollModel::jddt);
  jddt.alpha = 0.8;
  jddt.beta2 = 0.0;

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dwell(60.0, 600.0);
  for (int trial = 0; trial < 20; ++trial) {
    TripTollMeter a, b, c;
    double t = 0.0;
    for (int lid : f.path.links) {
      double leave = t + dwell(rng);
      bool in = f.cordon.in_cordon[lid] != 0;
      a.on_link_exit(f.net.links[lid], in, t, leave, dist);
      b.on_link_exit(f.net.links[lid], in, t, leave, jdtt);
      c.on_link_exit(f.net.links[lid], in, t, leave, jddt);
      t = leave;
    }
    CHECK(a.total() == doctest::Approx(b.total()).epsilon(1e-12));
    CHECK(a.total() == doctest::Approx(c.total()).epsilon(1e-12));
  }
}

TEST_CASE("delay component never exceeds the time component at equal rates") {
  Fixture f;
  TollSchedule time_toll = active_schedule(TollModel::time);
  time_toll.beta1 = 9.0;
  TollSchedule delay_toll = active_schedule(TollModel::delay);
  delay_toll.beta2 = 9.0;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> extra(0.0, 240.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> times = f.free_flow_times();
    for (double& t : times) t += extra(rng);
    double tt = toll_components(f.path, times, f.net, f.cordon, time_toll, 60.0).total();
    double dt = toll_components(f.path, times, f.net, f.cordon, delay_toll, 60.0).total();
    CHECK(dt <= tt + 1e-12);
  }
}

TEST_CASE("time-dependent schedules hold rates constant within each step") {
  TollSchedule sched = active_schedule(TollModel::distance);
  sched.period_start_s = 1000.0;
  sched.period_end_s = 3400.0;  // two full 20-min steps
  sched.step_s = 1200.0;
  sched.alpha_steps = {1.0, 0.25};
  CHECK(sched.alpha_at(999.0) == 0.0);
  CHECK(sched.alpha_at(1000.0) == 1.0);
  CHECK(sched.alpha_at(2199.0) == 1.0);
  CHECK(sched.alpha_at(2200.0) == 0.25);
  CHECK(sched.alpha_at(3399.0) == 0.25);
  CHECK(sched.alpha_at(3400.0) == 0.0);
}

TEST_CASE("schedule validation rejects negative rates") {
  TollSchedule sched = active_schedule(TollModel::distance);
  sched.alpha = -0.1;
  CHECK_THROWS(sched.validate());
}
