#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tsc/env/markov_game.hpp"
#include "tsc/env/road_network.hpp"

namespace tsc::env {

inline constexpr int kDefaultHorizon = 3600;

/// Queue counts and waiting sums of one incoming lane, the inputs of the reward.
struct LaneLoad {
  std::int64_t queue = 0;
  std::int64_t wait_sum = 0;  // seconds, over all queued vehicles
  bool priority = false;
};

/// r = -a1 (sum_p a2 q + sum_np b2 q) - b1 (sum_p a2 w + sum_np b2 w).
double compute_reward(std::span<const LaneLoad> lanes, const RewardWeights& weights);

struct Vehicle {
  enum class State { source, moving, queued, exited };

  int id = 0;
  int flow = 0;  // index into the demand flows; selects the route
  int leg = 0;   // position within the route
  int lane = -1; // lane currently assigned (moving toward or queued on)
  State state = State::source;
  int spawn_time = 0;
  int arrival_time = 0;         // when it reaches the back of its lane's queue
  std::int64_t waiting_clock = 0;
  std::optional<int> exit_time;
};

struct IntersectionState {
  int phase = 0;
  int pending_phase = 0;
  int yellow_remaining = 0;
};

/// Mesoscopic queue simulator: vehicles cross links at free-flow time, then
/// wait in a FIFO lane queue until a green phase discharges them at the
/// saturation headway. One call to step() advances one second.
class TrafficEnv final : public MarkovGame {
 public:
  TrafficEnv(RoadNetworkSpec spec, DemandProfile demand, RewardWeights weights, std::uint64_t seed,
             int horizon = kDefaultHorizon);

  std::size_t agent_count() const override { return spec_.intersections.size(); }
  std::size_t observation_width(std::size_t agent) const override;
  std::size_t action_count(std::size_t agent) const override;
  int horizon() const override { return horizon_; }
  int clock() const override { return t_; }
  bool done() const override { return t_ >= horizon_; }

  void reset(std::uint64_t seed) override;
  /// Interleaved per incoming lane: (front vehicle waiting clock, vehicles assigned).
  std::vector<double> observe(std::size_t agent) const override;
  StepResult step(std::span<const int> joint_action) override;
  MetricsRecord metrics_snapshot() const override;

  double reward(std::size_t agent) const;
  std::vector<LaneLoad> lane_loads(std::size_t agent) const;

  /// Poisson arrivals for the current second into the virtual source queues,
  /// then admission into the network. Returns vehicles generated.
  int spawn_arrivals();

  const RoadNetworkSpec& spec() const { return spec_; }
  const DemandProfile& demand() const { return demand_; }
  const RewardWeights& weights() const { return weights_; }
  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const IntersectionState& intersection(std::size_t i) const { return signals_[i]; }
  const std::deque<int>& lane_queue(int lane) const { return lanes_[static_cast<std::size_t>(lane)].queue; }
  const std::deque<int>& lane_moving(int lane) const { return lanes_[static_cast<std::size_t>(lane)].moving; }
  double discharge_credit(int lane) const { return lanes_[static_cast<std::size_t>(lane)].credit; }
  const std::vector<int>& route(int flow) const { return routes_[static_cast<std::size_t>(flow)]; }
  std::int64_t exited() const { return exited_; }

  /// Test hook: places a vehicle of the given flow at the back of a lane's
  /// queue (or on the lane, arriving at arrival_time) as if it had spawned.
  int inject_vehicle(int flow, int leg, int lane, bool queued, int arrival_time, std::int64_t waiting_clock = 0);
  /// Test hook: forces a signal state.
  void set_signal(std::size_t i, IntersectionState s) { signals_[i] = s; }

 private:
  struct LaneState {
    std::deque<int> moving;  // vehicle ids in arrival order
    std::deque<int> queue;   // vehicle ids, front discharges first
    double credit = 0.0;
  };

  void apply_signal_logic(std::span<const int> joint_action);
  void admit_from_sources();
  void advance_moving();
  void discharge();
  void accumulate_waiting();
  /// Picks the lane of `link` for a vehicle about to travel `link` at route
  /// position `leg`; -1 when every suitable lane is at jam capacity.
  int choose_lane(int link, const Vehicle& v, int leg) const;
  void enter_link(Vehicle& v, int leg, int lane);
  std::int64_t lane_occupancy(int lane) const;

  RoadNetworkSpec spec_;
  DemandProfile demand_;
  RewardWeights weights_;
  int horizon_;
  std::vector<std::vector<int>> routes_;       // per flow
  std::vector<std::vector<int>> incoming_;     // per intersection
  std::vector<bool> lane_priority_;
  std::vector<std::vector<std::vector<bool>>> phase_green_;  // [intersection][phase][global lane]
  std::vector<int> controlled_lanes_;

  std::mt19937_64 rng_;
  int t_ = 0;
  std::vector<Vehicle> vehicles_;
  std::vector<LaneState> lanes_;
  std::vector<IntersectionState> signals_;
  std::vector<std::deque<int>> sources_;  // per node, only boundary nodes used
  std::int64_t spawned_ = 0;
  std::int64_t exited_ = 0;
  std::int64_t completed_wait_ = 0;
  std::int64_t exits_this_step_ = 0;
  std::deque<std::int64_t> recent_exits_;  // last 60 one-second exit counts
  std::vector<double> last_rewards_;
};

}  // namespace tsc::env
