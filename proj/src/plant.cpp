#include "nfdp/plant.hpp"

#include <algorithm>
#include <cmath>

namespace nfdp {

SimOutput run_horizon(const Scenario& scenario, const TollSchedule& schedule, uint64_t seed) {
  Simulator sim(scenario, schedule, seed);
  sim.run();
  return sim.take_output();
}

Simulator::Simulator(const Scenario& scenario, const TollSchedule& schedule, uint64_t seed)
    : scn_(scenario), schedule_(schedule), rng_(seed) {
  schedule_.validate();

  const Network& net = scn_.network;
  const int num_links = static_cast<int>(net.links.size());
  const int num_intervals = scn_.demand.num_intervals;

  free_flow_time_s_.resize(num_links);
  links_rt_.resize(num_links);
  for (int lid = 0; lid < num_links; ++lid) {
    const Link& link = net.links[lid];
    LinkRt& lrt = links_rt_[lid];
    free_flow_time_s_[lid] = link.free_flow_time_s();
    lrt.rate_per_s = link.capacity_vphpl * link.lanes / 3600.0;
    lrt.credit_cap = std::max(1.0, lrt.rate_per_s * scn_.sim.step_s);
    lrt.storage_cap = static_cast<int>(std::ceil(link.storage_veh() - 1e-9));
  }

  origin_queues_.resize(net.num_nodes);

  out_.num_intervals = num_intervals;
  out_.interval_s = scn_.demand.interval_s;
  out_.step_s = scn_.sim.step_s;
  out_.seed = seed;
  out_.links.assign(num_intervals, std::vector<LinkIntervalState>(num_links));
  out_.cordon_entries.assign(num_intervals, 0);
  out_.completions_by_interval.assign(num_intervals, 0);
  exits_by_interval_.assign(num_intervals, 0);

  cf_.resize(scn_.paths.routes.size());
  probs_.resize(scn_.paths.routes.size());
  for (size_t od = 0; od < scn_.paths.routes.size(); ++od)
    cf_[od] = commonality_factors(scn_.paths.routes[od], net, scn_.choice.beta0,
                                  scn_.choice.gamma0);

  prev_interval_time_s_ = free_flow_time_s_;
  build_departures();
  refresh_choice_probabilities();
}

void Simulator::build_departures() {
  const DemandTable& dem = scn_.demand;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Demand values are fractional; integerize per OD with a carry so totals are
  // preserved and deterministic.
  for (size_t od = 0; od < dem.od.size(); ++od) {
    double carry = 0.0;
    for (int h = 0; h < dem.num_intervals; ++h) {
      carry += dem.demand[od][h] * dem.multiplier;
      int count = static_cast<int>(std::floor(carry + 1e-9));
      carry -= count;
      for (int j = 0; j < count; ++j) {
        VehicleRt v;
        v.id = static_cast<int>(vehicles_.size());
        v.od = static_cast<int>(od);
        v.depart_s = (h + unit(rng_)) * dem.interval_s;
        vehicles_.push_back(std::move(v));
        TripRecord rec;
        rec.vehicle_id = vehicles_.back().id;
        rec.od_index = static_cast<int>(od);
        rec.depart_s = vehicles_.back().depart_s;
        out_.trips.push_back(rec);
        departures_.push_back({vehicles_.back().depart_s, vehicles_.back().id});
      }
    }
  }
  std::sort(departures_.begin(), departures_.end(), [](const Departure& a, const Departure& b) {
    if (a.time_s != b.time_s) return a.time_s < b.time_s;
    return a.vehicle < b.vehicle;
  });
}

void Simulator::refresh_choice_probabilities() {
  // Probabilities for interval h come from interval h-1 link times (free-flow
  // for the first interval); tolls are evaluated at the start of the interval
  // being chosen for, i.e. at the rates the traveler would actually face.
  const double eval_t = current_interval_ * scn_.demand.interval_s;
  for (size_t od = 0; od < scn_.paths.routes.size(); ++od) {
    const auto& routes = scn_.paths.routes[od];
    std::vector<double> v(routes.size());
    for (size_t r = 0; r < routes.size(); ++r)
      v[r] = generalized_cost(routes[r], prev_interval_time_s_, scn_.network, scn_.cordon,
                              schedule_, eval_t, scn_.choice.vot_dollars_per_hour)
                 .generalized_min;
    probs_[od] = choice_probabilities(v, cf_[od], scn_.choice.theta0);
  }
}

int Simulator::interval_of_now() const { return current_interval_; }

int Simulator::free_space(int link_id) const {
  const LinkRt& lrt = links_rt_[link_id];
  return lrt.storage_cap - lrt.occupancy;
}

long Simulator::in_network() const { return out_.departed - out_.completed; }

long Simulator::on_links() const {
  long n = 0;
  for (const LinkRt& lrt : links_rt_) n += lrt.occupancy;
  return n;
}

long Simulator::waiting_at_origins() const {
  long n = 0;
  for (const auto& q : origin_queues_) n += static_cast<long>(q.size());
  return n;
}

void Simulator::process_departures() {
  while (next_departure_ < departures_.size() &&
         departures_[next_departure_].time_s <= now_s_) {
    VehicleRt& v = vehicles_[departures_[next_departure_].vehicle];
    next_departure_++;
    v.path = sample_path(probs_[v.od], rng_);
    v.route = scn_.paths.routes[v.od][v.path].links;
    out_.trips[v.id].path_index = v.path;
    out_.departed++;
    origin_queues_[scn_.demand.od[v.od].origin].push_back(v.id);
  }
}

void Simulator::pipe_to_queue() {
  for (LinkRt& lrt : links_rt_) {
    while (!lrt.pipe.empty() && lrt.pipe.front().first <= now_s_) {
      lrt.queue.push_back(lrt.pipe.front().second);
      lrt.pipe.pop_front();
    }
  }
}

int Simulator::event_interval() const {
  // tests may drive steps past the horizon; attribute to the last interval
  return std::min(current_interval_, out_.num_intervals - 1);
}

void Simulator::enter_link(VehicleRt& v, int link_id) {
  LinkRt& lrt = links_rt_[link_id];
  v.leg += 1;
  v.link_enter_s = now_s_;
  lrt.pipe.emplace_back(now_s_ + free_flow_time_s_[link_id], v.id);
  lrt.occupancy++;
  bool into_cordon = scn_.cordon.in_cordon[link_id] != 0;
  if (into_cordon && !v.in_cordon) {
    out_.cordon_entries[event_interval()]++;
    out_.trips[v.id].entered_cordon = true;
    v.meter.on_cordon_entry(now_s_, schedule_);
  }
  v.in_cordon = into_cordon;
}

void Simulator::serve_from_queue(int link_id, bool completing, int next_link) {
  LinkRt& lrt = links_rt_[link_id];
  const int vid = lrt.queue.front();
  lrt.queue.pop_front();
  lrt.occupancy--;
  lrt.credit -= 1.0;
  lrt.exits++;
  exits_by_interval_[event_interval()]++;

  VehicleRt& v = vehicles_[vid];
  const Link& link = scn_.network.links[link_id];
  const double spent = now_s_ - v.link_enter_s;
  lrt.exit_time_sum_s += spent;

  TripRecord& rec = out_.trips[vid];
  rec.distance_km += link.length_km;
  const bool in_cordon = scn_.cordon.in_cordon[link_id] != 0;
  if (in_cordon) {
    rec.cordon_km += link.length_km;
    rec.cordon_time_s += spent;
    rec.cordon_delay_s += spent - free_flow_time_s_[link_id];
  }
  v.meter.on_link_exit(link, in_cordon, v.link_enter_s, now_s_, schedule_);

  if (completing) {
    rec.completed = true;
    rec.complete_s = now_s_;
    rec.toll_dollars = v.meter.total();
    out_.completed++;
    out_.completions_by_interval[event_interval()]++;
    v.leg = -2;
  } else {
    enter_link(v, next_link);
  }
}

void Simulator::transfer_step() {
  const double dt = scn_.sim.step_s;
  for (LinkRt& lrt : links_rt_)
    lrt.credit = std::min(lrt.credit + lrt.rate_per_s * dt, lrt.credit_cap);

  const Network& net = scn_.network;
  for (int node = 0; node < net.num_nodes; ++node) {
    const auto& in = net.in_links[node];
    if (in.empty()) continue;
    const auto& outs = net.out_links[node];
    bool progress = true;
    while (progress) {
      progress = false;
      // completions: exits to the destination are storage-unconstrained
      for (int lid : in) {
        LinkRt& a = links_rt_[lid];
        while (a.credit >= 1.0 && !a.queue.empty()) {
          const VehicleRt& v = vehicles_[a.queue.front()];
          if (v.leg + 1 < static_cast<int>(v.route.size())) break;
          serve_from_queue(lid, /*completing=*/true, -1);
          progress = true;
        }
      }
      // one space-constrained grant per downstream link per pass; competing
      // inflows to a full link are served round-robin by upstream link id
      for (int bid : outs) {
        if (free_space(bid) <= 0) continue;
        LinkRt& b = links_rt_[bid];
        int first_candidate = -1;
        int first_at_or_after = -1;
        for (int lid : in) {
          const LinkRt& a = links_rt_[lid];
          if (a.credit < 1.0 || a.queue.empty()) continue;
          const VehicleRt& v = vehicles_[a.queue.front()];
          if (v.leg + 1 >= static_cast<int>(v.route.size()) || v.route[v.leg + 1] != bid)
            continue;
          if (first_candidate == -1) first_candidate = lid;
          if (lid >= b.rr_next && first_at_or_after == -1) first_at_or_after = lid;
        }
        const int chosen = first_at_or_after != -1 ? first_at_or_after : first_candidate;
        if (chosen == -1) continue;
        serve_from_queue(chosen, /*completing=*/false, bid);
        b.rr_next = chosen + 1;
        progress = true;
      }
    }
  }
}

void Simulator::origin_entries() {
  for (size_t node = 0; node < origin_queues_.size(); ++node) {
    auto& waiting = origin_queues_[node];
    while (!waiting.empty()) {
      VehicleRt& v = vehicles_[waiting.front()];
      const int first_link = v.route.front();
      if (free_space(first_link) <= 0) break;  // FIFO per origin, no overtaking
      waiting.pop_front();
      enter_link(v, first_link);
    }
  }
}

void Simulator::accumulate_occupancy() {
  const double dt = scn_.sim.step_s;
  for (LinkRt& lrt : links_rt_) lrt.occ_time_s += lrt.occupancy * dt;
}

void Simulator::finalize_interval() {
  const double interval_s = scn_.demand.interval_s;
  const int h = current_interval_;
  for (size_t lid = 0; lid < links_rt_.size(); ++lid) {
    LinkRt& lrt = links_rt_[lid];
    const Link& link = scn_.network.links[lid];
    LinkIntervalState& st = out_.links[h][lid];
    st.density_vpkmpl = lrt.occ_time_s / interval_s / link.lane_km();
    st.flow_vphpl = lrt.exits / (link.lanes * interval_s / 3600.0);
    st.travel_time_s = lrt.exits > 0 ? lrt.exit_time_sum_s / lrt.exits : free_flow_time_s_[lid];
    st.speed_kmh = link.length_km / (st.travel_time_s / 3600.0);
    st.exit_count = lrt.exits;
    st.queue_end = static_cast<int>(lrt.queue.size());
    lrt.occ_time_s = 0.0;
    lrt.exits = 0;
    lrt.exit_time_sum_s = 0.0;
    prev_interval_time_s_[lid] = st.travel_time_s;
  }
  current_interval_++;
  if (current_interval_ < out_.num_intervals) refresh_choice_probabilities();
}

void Simulator::step() {
  process_departures();
  pipe_to_queue();
  transfer_step();
  origin_entries();
  accumulate_occupancy();
  step_count_++;
  now_s_ = step_count_ * scn_.sim.step_s;
  const long steps_per_interval = std::llround(scn_.demand.interval_s / scn_.sim.step_s);
  if (step_count_ % steps_per_interval == 0 && current_interval_ < out_.num_intervals)
    finalize_interval();
}

void Simulator::run() {
  const long total_steps =
      std::llround(scn_.demand.interval_s / scn_.sim.step_s) * out_.num_intervals;
  while (step_count_ < total_steps) step();
  out_.in_network_end = in_network();
  out_.stalled = out_.in_network_end > 0 && out_.num_intervals > 0 &&
                 exits_by_interval_.back() == 0;
}

int Simulator::place_queued_vehicle(int link_id, std::vector<int> remaining_links) {
  VehicleRt v;
  v.id = static_cast<int>(vehicles_.size());
  v.route.push_back(link_id);
  v.route.insert(v.route.end(), remaining_links.begin(), remaining_links.end());
  v.leg = 0;
  v.depart_s = now_s_;
  v.link_enter_s = now_s_;
  v.in_cordon = scn_.cordon.in_cordon[link_id] != 0;

  TripRecord rec;
  rec.vehicle_id = v.id;
  rec.depart_s = now_s_;
  out_.trips.push_back(rec);
  out_.departed++;

  links_rt_[link_id].queue.push_back(v.id);
  links_rt_[link_id].occupancy++;
  vehicles_.push_back(std::move(v));
  return vehicles_.back().id;
}

}  // namespace nfdp
