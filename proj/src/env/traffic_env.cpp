#include "tsc/env/traffic_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsc/errors.hpp"

namespace tsc::env {

double compute_reward(std::span<const LaneLoad> lanes, const RewardWeights& w) {
  double queue_term = 0.0;
  double wait_term = 0.0;
  for (const LaneLoad& l : lanes) {
    const double weight = l.priority ? w.a2 : w.b2;
    queue_term += weight * static_cast<double>(l.queue);
    wait_term += weight * static_cast<double>(l.wait_sum);
  }
  return -w.a1 * queue_term - w.b1 * wait_term;
}

TrafficEnv::TrafficEnv(RoadNetworkSpec spec, DemandProfile demand, RewardWeights weights, std::uint64_t seed,
                       int horizon)
    : spec_(std::move(spec)), demand_(std::move(demand)), weights_(weights), horizon_(horizon) {
  if (horizon_ <= 0) throw ConfigError("horizon must be positive");
  spec_.index_lanes();
  validate_network(spec_);
  weights_.validate();
  demand_.validate(spec_);
  for (const OdFlow& f : demand_.flows) routes_.push_back(route_vehicle(spec_, f.origin, f.destination));

  lane_priority_.assign(spec_.lane_count(), false);
  for (int l : spec_.priority_lanes) lane_priority_[static_cast<std::size_t>(l)] = true;
  for (std::size_t i = 0; i < spec_.intersections.size(); ++i) {
    incoming_.push_back(spec_.incoming_lanes(i));
    controlled_lanes_.insert(controlled_lanes_.end(), incoming_.back().begin(), incoming_.back().end());
    std::vector<std::vector<bool>> greens;
    for (const Phase& p : spec_.intersections[i].phases) {
      std::vector<bool> g(spec_.lane_count(), false);
      for (int l : p) g[static_cast<std::size_t>(l)] = true;
      greens.push_back(std::move(g));
    }
    phase_green_.push_back(std::move(greens));
  }
  reset(seed);
}

std::size_t TrafficEnv::observation_width(std::size_t agent) const {
  if (agent >= agent_count()) throw SimulationError("unknown intersection " + std::to_string(agent));
  return 2 * incoming_[agent].size();
}

std::size_t TrafficEnv::action_count(std::size_t agent) const {
  if (agent >= agent_count()) throw SimulationError("unknown intersection " + std::to_string(agent));
  return spec_.intersections[agent].phases.size();
}

void TrafficEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  t_ = 0;
  vehicles_.clear();
  lanes_.assign(spec_.lane_count(), LaneState{});
  signals_.assign(agent_count(), IntersectionState{});
  sources_.assign(spec_.nodes.size(), {});
  spawned_ = exited_ = completed_wait_ = exits_this_step_ = 0;
  recent_exits_.clear();
  last_rewards_.assign(agent_count(), 0.0);
}

std::vector<double> TrafficEnv::observe(std::size_t agent) const {
  if (agent >= agent_count()) throw SimulationError("unknown intersection " + std::to_string(agent));
  std::vector<double> obs;
  obs.reserve(2 * incoming_[agent].size());
  for (int l : incoming_[agent]) {
    const LaneState& lane = lanes_[static_cast<std::size_t>(l)];
    const double front_wait =
        lane.queue.empty() ? 0.0 : static_cast<double>(vehicles_[static_cast<std::size_t>(lane.queue.front())].waiting_clock);
    obs.push_back(front_wait);
    obs.push_back(static_cast<double>(lane.queue.size() + lane.moving.size()));
  }
  return obs;
}

std::vector<LaneLoad> TrafficEnv::lane_loads(std::size_t agent) const {
  std::vector<LaneLoad> loads;
  for (int l : incoming_[agent]) {
    const LaneState& lane = lanes_[static_cast<std::size_t>(l)];
    LaneLoad load;
    load.queue = static_cast<std::int64_t>(lane.queue.size());
    for (int id : lane.queue) load.wait_sum += vehicles_[static_cast<std::size_t>(id)].waiting_clock;
    load.priority = lane_priority_[static_cast<std::size_t>(l)];
    loads.push_back(load);
  }
  return loads;
}

double TrafficEnv::reward(std::size_t agent) const {
  if (agent >= agent_count()) throw SimulationError("unknown intersection " + std::to_string(agent));
  const auto loads = lane_loads(agent);
  return compute_reward(loads, weights_);
}

std::int64_t TrafficEnv::lane_occupancy(int lane) const {
  const LaneState& s = lanes_[static_cast<std::size_t>(lane)];
  return static_cast<std::int64_t>(s.moving.size() + s.queue.size());
}

int TrafficEnv::choose_lane(int link, const Vehicle& v, int leg) const {
  const LinkSpec& spec = spec_.links[static_cast<std::size_t>(link)];
  const std::vector<int>& route = routes_[static_cast<std::size_t>(v.flow)];
  const bool exit_link = !spec_.is_intersection(spec.to);
  const int next = exit_link ? -1 : route[static_cast<std::size_t>(leg) + 1];
  int best = -1;
  std::size_t best_queue = 0;
  for (std::size_t k = 0; k < spec.lanes.size(); ++k) {
    const auto& moves = spec.lanes[k].movements;
    if (!exit_link && std::find(moves.begin(), moves.end(), next) == moves.end()) continue;
    const int lane = spec_.lane_id(link, static_cast<int>(k));
    if (lane_occupancy(lane) >= spec.jam_capacity_per_lane) continue;
    const std::size_t q = lanes_[static_cast<std::size_t>(lane)].queue.size();
    if (best < 0 || q < best_queue) {
      best = lane;
      best_queue = q;
    }
  }
  return best;
}

void TrafficEnv::enter_link(Vehicle& v, int leg, int lane) {
  const int link = spec_.lane_link(lane);
  v.leg = leg;
  v.lane = lane;
  v.state = Vehicle::State::moving;
  v.arrival_time = t_ + static_cast<int>(std::ceil(spec_.links[static_cast<std::size_t>(link)].free_flow_time));
  lanes_[static_cast<std::size_t>(lane)].moving.push_back(v.id);
}

int TrafficEnv::inject_vehicle(int flow, int leg, int lane, bool queued, int arrival_time,
                               std::int64_t waiting_clock) {
  Vehicle v;
  v.id = static_cast<int>(vehicles_.size());
  v.flow = flow;
  v.leg = leg;
  v.lane = lane;
  v.spawn_time = t_;
  v.arrival_time = arrival_time;
  v.waiting_clock = waiting_clock;
  v.state = queued ? Vehicle::State::queued : Vehicle::State::moving;
  auto& ls = lanes_[static_cast<std::size_t>(lane)];
  (queued ? ls.queue : ls.moving).push_back(v.id);
  vehicles_.push_back(v);
  ++spawned_;
  return v.id;
}

void TrafficEnv::apply_signal_logic(std::span<const int> joint_action) {
  for (std::size_t i = 0; i < signals_.size(); ++i) {
    IntersectionState& s = signals_[i];
    if (s.yellow_remaining > 0) {
      if (--s.yellow_remaining == 0) s.phase = s.pending_phase;
      continue;
    }
    const int desired = joint_action[i];
    if (desired == s.phase) continue;
    if (spec_.yellow_time == 0) {
      s.phase = s.pending_phase = desired;
    } else {
      s.pending_phase = desired;
      s.yellow_remaining = spec_.yellow_time;
    }
  }
}

int TrafficEnv::spawn_arrivals() {
  int generated = 0;
  for (std::size_t f = 0; f < demand_.flows.size(); ++f) {
    const double rate = demand_.rate(demand_.flows[f], t_);
    if (rate <= 0.0) continue;
    std::poisson_distribution<int> arrivals(rate);  // Δt = 1 s
    const int n = arrivals(rng_);
    for (int k = 0; k < n; ++k) {
      Vehicle v;
      v.id = static_cast<int>(vehicles_.size());
      v.flow = static_cast<int>(f);
      v.spawn_time = t_;
      sources_[static_cast<std::size_t>(demand_.flows[f].origin)].push_back(v.id);
      vehicles_.push_back(v);
    }
    generated += n;
  }
  spawned_ += generated;
  admit_from_sources();
  return generated;
}

void TrafficEnv::admit_from_sources() {
  for (auto& source : sources_) {
    while (!source.empty()) {
      Vehicle& v = vehicles_[static_cast<std::size_t>(source.front())];
      const int link = routes_[static_cast<std::size_t>(v.flow)].front();
      const int lane = choose_lane(link, v, 0);
      if (lane < 0) break;
      source.pop_front();
      enter_link(v, 0, lane);
    }
  }
}

void TrafficEnv::advance_moving() {
  for (std::size_t l = 0; l < lanes_.size(); ++l) {
    LaneState& lane = lanes_[l];
    const bool exit_link = !spec_.is_intersection(spec_.links[static_cast<std::size_t>(spec_.lane_link(static_cast<int>(l)))].to);
    while (!lane.moving.empty() && vehicles_[static_cast<std::size_t>(lane.moving.front())].arrival_time <= t_) {
      Vehicle& v = vehicles_[static_cast<std::size_t>(lane.moving.front())];
      lane.moving.pop_front();
      if (exit_link) {
        v.state = Vehicle::State::exited;
        v.exit_time = t_;
        v.lane = -1;
        ++exited_;
        ++exits_this_step_;
        completed_wait_ += v.waiting_clock;
      } else {
        v.state = Vehicle::State::queued;
        lane.queue.push_back(v.id);
      }
    }
  }
}

void TrafficEnv::discharge() {
  const double increment = 1.0 / spec_.saturation_headway;
  for (std::size_t i = 0; i < signals_.size(); ++i) {
    const IntersectionState& s = signals_[i];
    const std::vector<bool>& green = phase_green_[i][static_cast<std::size_t>(s.phase)];
    for (int l : incoming_[i]) {
      LaneState& lane = lanes_[static_cast<std::size_t>(l)];
      if (s.yellow_remaining > 0 || !green[static_cast<std::size_t>(l)]) {
        lane.credit = 0.0;
        continue;
      }
      lane.credit += increment;
      const int allowed = static_cast<int>(std::floor(lane.credit));
      int moved = 0;
      while (moved < allowed && !lane.queue.empty()) {
        Vehicle& v = vehicles_[static_cast<std::size_t>(lane.queue.front())];
        const int next_link = routes_[static_cast<std::size_t>(v.flow)][static_cast<std::size_t>(v.leg) + 1];
        const int next_lane = choose_lane(next_link, v, v.leg + 1);
        if (next_lane < 0) break;  // spillback
        lane.queue.pop_front();
        enter_link(v, v.leg + 1, next_lane);
        ++moved;
      }
      lane.credit = std::min(lane.credit - moved, 1.0);
    }
  }
}

void TrafficEnv::accumulate_waiting() {
  for (int l : controlled_lanes_)
    for (int id : lanes_[static_cast<std::size_t>(l)].queue) ++vehicles_[static_cast<std::size_t>(id)].waiting_clock;
}

StepResult TrafficEnv::step(std::span<const int> joint_action) {
  if (done()) throw SimulationError("step called after the episode ended");
  if (joint_action.size() != agent_count())
    throw SimulationError("expected " + std::to_string(agent_count()) + " actions, got " +
                          std::to_string(joint_action.size()));
  for (std::size_t i = 0; i < joint_action.size(); ++i)
    if (joint_action[i] < 0 || joint_action[i] >= static_cast<int>(action_count(i)))
      throw SimulationError("action " + std::to_string(joint_action[i]) + " out of range for intersection " +
                            std::to_string(i));

  exits_this_step_ = 0;
  apply_signal_logic(joint_action);
  spawn_arrivals();
  advance_moving();
  discharge();
  accumulate_waiting();
  ++t_;

  recent_exits_.push_back(exits_this_step_);
  if (recent_exits_.size() > 60) recent_exits_.pop_front();

  StepResult out;
  out.rewards.resize(agent_count());
  for (std::size_t i = 0; i < agent_count(); ++i) out.rewards[i] = reward(i);
  last_rewards_ = out.rewards;
  out.observations = observe_all();
  out.metrics = metrics_snapshot();
  out.done = done();
  return out;
}

MetricsRecord TrafficEnv::metrics_snapshot() const {
  MetricsRecord m;
  m.t = t_;
  for (int l : controlled_lanes_) {
    const LaneState& lane = lanes_[static_cast<std::size_t>(l)];
    m.total_queue += static_cast<std::int64_t>(lane.queue.size());
    for (int id : lane.queue) m.total_wait += static_cast<double>(vehicles_[static_cast<std::size_t>(id)].waiting_clock);
  }
  m.mean_queue_per_lane =
      controlled_lanes_.empty() ? 0.0 : static_cast<double>(m.total_queue) / static_cast<double>(controlled_lanes_.size());
  m.completed_trips = exited_;
  m.mean_delay = exited_ == 0 ? 0.0 : static_cast<double>(completed_wait_) / static_cast<double>(exited_);
  m.minute_flow = std::accumulate(recent_exits_.begin(), recent_exits_.end(), std::int64_t{0});
  m.exits_this_step = exits_this_step_;
  m.spawned = spawned_;
  for (const LaneState& lane : lanes_) m.in_network += static_cast<std::int64_t>(lane.moving.size() + lane.queue.size());
  for (const auto& s : sources_) m.virtual_queued += static_cast<std::int64_t>(s.size());
  m.rewards = last_rewards_;
  return m;
}

}  // namespace tsc::env
