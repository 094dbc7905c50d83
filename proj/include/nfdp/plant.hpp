#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <vector>

#include "nfdp/routing.hpp"
#include "nfdp/scenario.hpp"
#include "nfdp/tolling.hpp"

namespace nfdp {

// ---------------------------------------------------------------------------
// Simulation output
// ---------------------------------------------------------------------------

struct LinkIntervalState {
  double density_vpkmpl = 0.0;  // time-mean vehicles / (length * lanes)
  double flow_vphpl = 0.0;      // exit count scaled to veh/h/lane
  double travel_time_s = 0.0;   // mean experienced time of exiters (free-flow if none)
  double speed_kmh = 0.0;       // length / travel time
  int exit_count = 0;
  int queue_end = 0;  // exit-queue length at end of interval
};

struct TripRecord {
  int vehicle_id = -1;
  int od_index = -1;
  int path_index = -1;
  double depart_s = 0.0;
  double complete_s = -1.0;
  double distance_km = 0.0;      // traversed links only
  double cordon_km = 0.0;
  double cordon_time_s = 0.0;
  double cordon_delay_s = 0.0;
  double toll_dollars = 0.0;
  bool completed = false;
  bool entered_cordon = false;
};

struct SimOutput {
  int num_intervals = 0;
  double interval_s = 300.0;
  double step_s = 1.0;
  uint64_t seed = 0;

  std::vector<std::vector<LinkIntervalState>> links;  // [interval][link id]
  std::vector<TripRecord> trips;                      // by vehicle id
  std::vector<long> cordon_entries;                   // entry events per interval
  std::vector<long> completions_by_interval;

  long departed = 0;
  long completed = 0;
  long in_network_end = 0;
  bool stalled = false;  // vehicles left but nothing exited any link in the last interval
};

// Runs the full horizon; deterministic for a given seed.
SimOutput run_horizon(const Scenario& scenario, const TollSchedule& schedule, uint64_t seed);

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

// Vehicle-based spatial-queue plant. Links are a free-flow pipe feeding a
// FIFO exit queue served at capacity; transfers respect downstream storage,
// with competing inflows to a full link granted round-robin by upstream link
// id. Pre-trip path choice, refreshed every measurement interval.
class Simulator {
 public:
  Simulator(const Scenario& scenario, const TollSchedule& schedule, uint64_t seed);

  void run();  // simulate to the end of the horizon
  const SimOutput& output() const { return out_; }
  SimOutput take_output() { return std::move(out_); }

  // Step-level driving, used by tests.
  void step();           // one full step: departures, pipe, transfers, entries, accounting
  void transfer_step();  // node transfers only
  double now() const { return now_s_; }

  // Places a synthetic vehicle at the back of a link's exit queue; returns its
  // id. `remaining_links` are traversed after the current link.
  int place_queued_vehicle(int link_id, std::vector<int> remaining_links);

  size_t queue_size(int link_id) const { return links_rt_[link_id].queue.size(); }
  int occupancy(int link_id) const { return links_rt_[link_id].occupancy; }
  int storage_cap(int link_id) const { return links_rt_[link_id].storage_cap; }
  long completed_count() const { return out_.completed; }
  long in_network() const;
  long on_links() const;
  long waiting_at_origins() const;
  std::span<const double> link_times_s() const { return prev_interval_time_s_; }

 private:
  struct VehicleRt {
    int id = -1;
    int od = -1;
    int path = -1;
    std::vector<int> route;  // full link sequence
    int leg = -1;            // index into route; -1 while waiting to enter
    double depart_s = 0.0;
    double link_enter_s = 0.0;
    bool in_cordon = false;  // current position inside the cordon
    TripTollMeter meter;
  };

  struct LinkRt {
    std::deque<std::pair<double, int>> pipe;  // (ready time, vehicle id), FIFO
    std::deque<int> queue;                    // vehicle ids
    int occupancy = 0;
    double credit = 0.0;  // fractional service allowance, capped
    double rate_per_s = 0.0;
    double credit_cap = 1.0;
    int storage_cap = 0;
    int rr_next = 0;  // upstream link id favored at the next contested grant
    // interval accumulators
    double occ_time_s = 0.0;
    int exits = 0;
    double exit_time_sum_s = 0.0;
  };

  struct Departure {
    double time_s;
    int vehicle;
  };

  void build_departures();
  void refresh_choice_probabilities();
  void process_departures();
  void pipe_to_queue();
  void origin_entries();
  void accumulate_occupancy();
  void finalize_interval();
  int event_interval() const;
  void enter_link(VehicleRt& v, int link_id);
  void serve_from_queue(int link_id, bool completing, int next_link);
  int free_space(int link_id) const;
  int interval_of_now() const;

  const Scenario& scn_;
  TollSchedule schedule_;
  std::mt19937_64 rng_;

  std::vector<VehicleRt> vehicles_;
  std::vector<Departure> departures_;  // sorted by (time, vehicle)
  size_t next_departure_ = 0;
  std::vector<LinkRt> links_rt_;
  std::vector<std::deque<int>> origin_queues_;  // per node
  std::vector<std::vector<double>> cf_;         // [od][path] commonality factors
  std::vector<std::vector<double>> probs_;      // [od][path] current interval
  std::vector<double> prev_interval_time_s_;    // per link, measured t_a(h-1)
  std::vector<double> free_flow_time_s_;

  double now_s_ = 0.0;
  long step_count_ = 0;
  int current_interval_ = 0;
  std::vector<long> exits_by_interval_;

  SimOutput out_;
};

}  // namespace nfdp
