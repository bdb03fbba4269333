#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tsc/errors.hpp"
#include "tsc/marl/dqn.hpp"
#include "tsc/marl/maddpg.hpp"
#include "tsc/net/gradcheck.hpp"

using namespace tsc;
using namespace tsc::marl;
using net::Matrix;
using net::Mlp;

namespace {

Hyperparameters small_hp() {
  Hyperparameters hp;
  hp.buffer_capacity = 1000;
  hp.batch_size = 8;
  hp.fc1 = 8;
  hp.fc2 = 8;
  return hp;
}

Transition random_transition(const JointLayout& layout, Rng& rng, std::int64_t step = 0) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  Transition t;
  for (std::size_t k = 0; k < layout.state_width(); ++k) t.state.push_back(u(rng));
  for (std::size_t k = 0; k < layout.state_width(); ++k) t.next_state.push_back(u(rng));
  for (std::size_t i = 0; i < layout.agents(); ++i) {
    std::vector<double> a(layout.action_counts[i]);
    double s = 0;
    for (double& x : a) s += (x = u(rng) + 0.01);
    for (double x : a) t.actions.push_back(x / s);
    t.rewards.push_back(-u(rng));
  }
  t.step_index = step;
  return t;
}

void zero_final_layer(Mlp& m, std::vector<double> bias) {
  const std::size_t last = m.layers().size() - 1;
  for (double& w : m.weights(last)) w = 0.0;
  std::copy(bias.begin(), bias.end(), m.bias(last).begin());
}

std::vector<double> params(const Mlp& m) { return {m.parameters().begin(), m.parameters().end()}; }

}  // namespace

TEST(SelectAction, ArgmaxOfLogits) {
  Mlp actor(actor_layers(3, 4, 8, 8), 1);
  zero_final_layer(actor, {2, 0, 0, 0});
  Rng rng(0);
  const ActionChoice c = select_action(actor, std::vector<double>{1, 2, 3}, false, 0.01, rng);
  EXPECT_EQ(c.phase, 0);
  EXPECT_THROW(select_action(actor, std::vector<double>{1, 2}, false, 0.01, rng), ShapeError);
}

TEST(SelectAction, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 0);
  EXPECT_EQ(argmax(std::vector<double>{0.1, 0.4, 0.4, 0.1}), 1);
}

TEST(SelectAction, DeterministicWithoutExploration) {
  Mlp actor(actor_layers(3, 4, 8, 8), 2);
  Rng rng(0);
  const std::vector<double> obs{0.5, -1, 2};
  const auto a = select_action(actor, obs, false, 0.01, rng), b = select_action(actor, obs, false, 0.01, rng);
  EXPECT_EQ(a.action, b.action);
}

TEST(SelectAction, ZeroSigmaMatchesGreedy) {
  Mlp actor(actor_layers(3, 4, 8, 8), 3);
  Rng r1(5), r2(5);
  const std::vector<double> obs{1, 2, 3};
  EXPECT_EQ(select_action(actor, obs, true, 0.0, r1).action, select_action(actor, obs, false, 0.0, r2).action);
}

TEST(SelectAction, AlwaysOnTheSimplex) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    Mlp actor(actor_layers(5, 4, 8, 8), static_cast<std::uint64_t>(trial));
    std::vector<double> obs(5);
    for (double& x : obs) x = std::normal_distribution<double>(0, 50)(rng);
    const ActionChoice c = select_action(actor, obs, true, 1.0, rng);
    double s = 0;
    for (double p : c.action) {
      ASSERT_GE(p, 0.0);
      s += p;
    }
    ASSERT_NEAR(s, 1.0, 1e-12);
    ASSERT_GE(c.phase, 0);
    ASSERT_LT(c.phase, 4);
  }
}

TEST(ReplayBuffer, FifoEviction) {
  ReplayBuffer buf(3, 1, 1, 1);
  for (int k = 1; k <= 4; ++k) buf.store({{double(k)}, {0.0}, {0.0}, {0.0}, k});
  ASSERT_EQ(buf.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(buf.at(i).step_index, static_cast<std::int64_t>(i) + 2);
}

TEST(ReplayBuffer, SamplesWithReplacement) {
  ReplayBuffer buf(10, 1, 1, 1);
  buf.store({{7.0}, {0.5}, {-1.0}, {8.0}, 0});
  Rng rng(1);
  const Minibatch mb = buf.sample(4, rng);
  ASSERT_EQ(mb.state.rows, 4u);
  for (std::size_t b = 0; b < 4; ++b) {
    EXPECT_EQ(mb.state(b, 0), 7.0);
    EXPECT_EQ(mb.next_state(b, 0), 8.0);
  }
}

TEST(ReplayBuffer, UniformWithinFiveSigma) {
  ReplayBuffer buf(10, 1, 1, 1);
  for (int k = 0; k < 10; ++k) buf.store({{double(k)}, {0.0}, {0.0}, {0.0}, k});
  Rng rng(2024);
  std::vector<int> freq(10, 0);
  for (int d = 0; d < 100; ++d)
    for (std::size_t i : buf.sample(1000, rng).indices) ++freq[i];
  const double sigma = std::sqrt(1e5 * 0.1 * 0.9);
  for (int f : freq) EXPECT_LE(std::abs(f - 1e4), 5 * sigma);
}

TEST(ReplayBuffer, Errors) {
  ReplayBuffer buf(4, 2, 1, 1);
  Rng rng(0);
  EXPECT_THROW(buf.sample(1, rng), SimulationError);
  EXPECT_THROW(buf.store({{1.0}, {0.0}, {0.0}, {1.0}, 0}), ShapeError);
}

TEST(ReplayBuffer, SerializationKeepsOrder) {
  ReplayBuffer buf(3, 2, 1, 1);
  for (int k = 0; k < 5; ++k) buf.store({{double(k), 1}, {0.5}, {-double(k)}, {2, double(k)}, k});
  net::ByteWriter w;
  buf.write(w);
  net::ByteReader r(w.bytes());
  const ReplayBuffer back = ReplayBuffer::read(r);
  EXPECT_TRUE(back == buf);
  Rng r1(3), r2(3);
  EXPECT_EQ(buf.sample(16, r1).state, back.sample(16, r2).state);
}

namespace {

struct TargetFixture {
  JointLayout layout{{2, 2}, {3, 3}};
  Mlp a0{actor_layers(2, 3, 8, 8), 1}, a1{actor_layers(2, 3, 8, 8), 2};
  Mlp critic{critic_layers(10, 8, 8), 3};
  Minibatch batch;

  TargetFixture() {
    ReplayBuffer buf(50, 4, 6, 2);
    Rng rng(4);
    for (int k = 0; k < 20; ++k) buf.store(random_transition(layout, rng));
    batch = buf.sample(16, rng);
  }
  std::vector<double> targets(double gamma) {
    const Mlp* actors[] = {&a0, &a1};
    return compute_targets(layout, CriticScope::centralized, 1, actors, critic, batch, gamma);
  }
};

}  // namespace

TEST(ComputeTargets, NoBootstrapAtGammaZero) {
  TargetFixture f;
  const auto y = f.targets(0.0);
  for (std::size_t b = 0; b < y.size(); ++b) EXPECT_EQ(y[b], f.batch.rewards(b, 1));
}

TEST(ComputeTargets, HandArithmetic) {
  TargetFixture f;
  zero_final_layer(f.critic, {2.0});
  for (std::size_t b = 0; b < f.batch.rewards.rows; ++b) f.batch.rewards(b, 1) = 1.0;
  for (double y : f.targets(0.95)) EXPECT_DOUBLE_EQ(y, 2.9);
}

TEST(ComputeTargets, ZeroCriticGivesReward) {
  TargetFixture f;
  for (double& p : f.critic.parameters()) p = 0.0;
  const auto y = f.targets(0.95);
  for (std::size_t b = 0; b < y.size(); ++b) EXPECT_EQ(y[b], f.batch.rewards(b, 1));
}

TEST(ComputeTargets, InvariantToExplorationNoise) {
  JointLayout layout{{3, 3}, {2, 2}};
  Hyperparameters quiet = small_hp(), noisy = small_hp();
  noisy.noise_std = 0.7;
  ActorCriticLearner a(layout, quiet, CriticScope::centralized, 5), b(layout, noisy, CriticScope::centralized, 5);
  ReplayBuffer buf(50, 6, 4, 2);
  Rng rng(1);
  for (int k = 0; k < 30; ++k) buf.store(random_transition(layout, rng));
  const Minibatch mb = buf.sample(16, rng);
  const Mlp* ta[] = {&a.agents()[0].policy().actor_target, &a.agents()[1].policy().actor_target};
  const Mlp* tb[] = {&b.agents()[0].policy().actor_target, &b.agents()[1].policy().actor_target};
  EXPECT_EQ(compute_targets(layout, CriticScope::centralized, 0, ta, a.agents()[0].policy().critic_target, mb, 0.95),
            compute_targets(layout, CriticScope::centralized, 0, tb, b.agents()[0].policy().critic_target, mb, 0.95));
}

TEST(CriticUpdate, ZeroErrorLeavesParameters) {
  DdpgPair pair(Mlp(actor_layers(2, 2, 4, 4), 1), Mlp(critic_layers(4, 8, 8), 2));
  Matrix in(5, 4);
  Rng rng(3);
  for (double& x : in.data) x = std::uniform_real_distribution<double>(-1, 1)(rng);
  const Matrix q = net::predict(pair.critic, in);
  const auto before = params(pair.critic);
  EXPECT_EQ(critic_update(pair, in, q.data, small_hp()), 0.0);
  EXPECT_EQ(params(pair.critic), before);
}

TEST(CriticUpdate, SingleSampleLoss) {
  DdpgPair pair(Mlp(actor_layers(2, 2, 4, 4), 1), Mlp(critic_layers(4, 8, 8), 2));
  zero_final_layer(pair.critic, {0.0});
  const Matrix in(1, 4, 0.3);
  EXPECT_EQ(critic_update(pair, in, std::vector<double>{1.0}, small_hp()), 1.0);
}

TEST(CriticUpdate, LossDecreasesOnMatrixGameBuffer) {
  // payoff of the shipped cooperative game; joint index = 3 a0 + a1
  const double payoff[9] = {0, 2, 0, 0, 2, 1, 2, 5, 3};
  const JointLayout layout{{1, 1}, {3, 3}};
  std::vector<double> drops;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    ReplayBuffer buf(1000, 2, 6, 2);
    for (int k = 0; k < 512; ++k) {
      Transition t;
      t.state = t.next_state = {1.0, 1.0};
      const int a0 = static_cast<int>(rng() % 3), a1 = static_cast<int>(rng() % 3);
      for (int p = 0; p < 3; ++p) t.actions.push_back(p == a0);
      for (int p = 0; p < 3; ++p) t.actions.push_back(p == a1);
      t.rewards = {payoff[3 * a0 + a1], payoff[3 * a0 + a1]};
      buf.store(t);
    }
    const Hyperparameters hp;
    ActorCriticLearner learner(layout, hp, CriticScope::centralized, seed);
    DdpgPair& pair = learner.agents()[0].policy();
    std::vector<double> losses;
    for (int k = 0; k < 100; ++k) {
      const Minibatch mb = buf.sample(hp.batch_size, rng);
      const Mlp* targets[] = {&learner.agents()[0].policy().actor_target, &learner.agents()[1].policy().actor_target};
      const auto y = compute_targets(layout, CriticScope::centralized, 0, targets, pair.critic_target, mb, hp.gamma);
      losses.push_back(critic_update(pair, critic_input(layout, CriticScope::centralized, 0, mb.state, mb.actions), y, hp));
    }
    const double head = (losses[0] + losses[1] + losses[2] + losses[3] + losses[4]) / 5;
    const double tail = (losses[95] + losses[96] + losses[97] + losses[98] + losses[99]) / 5;
    drops.push_back(head - tail);
  }
  std::sort(drops.begin(), drops.end());
  EXPECT_GT(drops[2], 0.0);
}

TEST(ActorUpdate, ConstantCriticLeavesActor) {
  DdpgPair pair(Mlp(actor_layers(2, 3, 8, 8), 1), Mlp(critic_layers(5, 8, 8), 2));
  // zero the weights that read the action columns (inputs 2..4)
  auto w = pair.critic.weights(0);
  for (std::size_t o = 0; o < 8; ++o)
    for (std::size_t c = 2; c < 5; ++c) w[o * 5 + c] = 0.0;
  Matrix obs(6, 2, 0.0), in(6, 5, 0.2);
  for (std::size_t b = 0; b < 6; ++b) obs(b, 0) = static_cast<double>(b);
  const auto before = params(pair.actor);
  const double norm = actor_update(pair, obs, in, 2, small_hp(), 1.0);
  EXPECT_EQ(norm, 0.0);
  EXPECT_EQ(params(pair.actor), before);
}

TEST(ActorUpdate, MovesTowardOptimalActionUnderPretrainedCritic) {
  const double payoff[9] = {0, 2, 0, 0, 2, 1, 2, 5, 3};
  const JointLayout layout{{1, 1}, {3, 3}};
  Hyperparameters hp;
  hp.batch_size = 64;
  ActorCriticLearner learner(layout, hp, CriticScope::centralized, 7);
  DdpgPair& pair = learner.agents()[0].policy();
  Rng rng(7);
  // regress the critic onto the payoff table over one-hot joint actions
  Hyperparameters fit = hp;
  fit.critic_lr = 0.01;
  for (int it = 0; it < 3000; ++it) {
    Matrix in(64, 8, 0.0);
    std::vector<double> y(64);
    for (std::size_t b = 0; b < 64; ++b) {
      const int a0 = static_cast<int>(rng() % 3), a1 = static_cast<int>(rng() % 3);
      in(b, 0) = in(b, 1) = 1.0;
      in(b, 2 + static_cast<std::size_t>(a0)) = 1.0;
      in(b, 5 + static_cast<std::size_t>(a1)) = 1.0;
      y[b] = payoff[3 * a0 + a1];
    }
    critic_update(pair, in, y, fit);
  }
  for (int a0 = 0; a0 < 3; ++a0) {
    Matrix in(1, 8, 0.0);
    in(0, 0) = in(0, 1) = 1.0;
    in(0, 2 + static_cast<std::size_t>(a0)) = 1.0;
    in(0, 6) = 1.0;
    ASSERT_NEAR(net::predict(pair.critic, in)(0, 0), payoff[3 * a0 + 1], 0.2);
  }
  // partner replays its optimal action 1; agent 0 should lean toward 2
  Matrix obs(64, 1, 1.0), in(64, 8, 0.0);
  for (std::size_t b = 0; b < 64; ++b) {
    in(b, 0) = in(b, 1) = 1.0;
    in(b, 6) = 1.0;
  }
  const Matrix before = net::predict(pair.actor, Matrix(1, 1, 1.0));
  actor_update(pair, obs, in, 2, hp, 1.0);
  const Matrix after = net::predict(pair.actor, Matrix(1, 1, 1.0));
  EXPECT_GT(after(0, 2), before(0, 2));
}

TEST(ActorUpdate, ChainedGradientMatchesFiniteDifferences) {
  Rng rng(17);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  Mlp actor(actor_layers(3, 3, 5, 5), 1), critic(critic_layers(7, 6, 6), 2);
  for (double& p : actor.parameters()) p = u(rng);
  for (double& p : critic.parameters()) p = u(rng);
  Matrix obs(6, 3), in(6, 7);
  for (double& x : obs.data) x = u(rng) * 3;
  for (double& x : in.data) x = u(rng);
  const std::size_t column = 4;

  const auto objective = [&](Mlp a) {
    net::ForwardCache ac = net::forward(a, obs, net::Mode::train);
    Matrix ci = in;
    for (std::size_t b = 0; b < 6; ++b)
      for (std::size_t c = 0; c < 3; ++c) ci(b, column + c) = ac.output()(b, c);
    const Matrix q = net::predict(critic, ci);
    double s = 0;
    for (double v : q.data) s += v;
    return -s / 6.0;
  };

  // analytic gradient via the same chain actor_update uses
  Mlp a = actor;
  net::ForwardCache ac = net::forward(a, obs, net::Mode::train);
  Matrix ci = in;
  for (std::size_t b = 0; b < 6; ++b)
    for (std::size_t c = 0; c < 3; ++c) ci(b, column + c) = ac.output()(b, c);
  Mlp cr = critic;
  net::ForwardCache cc = net::forward(cr, ci, net::Mode::infer);
  const auto cg = net::backward(critic, cc, Matrix(6, 1, -1.0 / 6.0));
  const auto ag = net::backward(actor, ac, columns(cg.input, column, 3));

  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t k = 0; k < actor.parameter_count(); ++k) {
    Mlp plus = actor, minus = actor;
    plus.parameters()[k] += h;
    minus.parameters()[k] -= h;
    const double numeric = (objective(plus) - objective(minus)) / (2 * h);
    worst = std::max(worst, net::relative_error(ag.parameters[k], numeric));
  }
  EXPECT_LT(worst, 1e-4);

  // and actor_update applies exactly that gradient's clipped Adam step
  Hyperparameters hp = small_hp();
  hp.clip_gradients = false;
  DdpgPair pair(actor, critic);
  EXPECT_DOUBLE_EQ(actor_update(pair, obs, in, column, hp, 1.0), net::global_norm(ag));
}

TEST(ActorUpdate, NoGradientReachesOtherActors) {
  const JointLayout layout{{2, 2, 2}, {3, 3, 3}};
  Hyperparameters hp = small_hp();
  ActorCriticLearner learner(layout, hp, CriticScope::centralized, 3);
  Rng rng(3);
  for (int k = 0; k < 40; ++k) learner.store(random_transition(layout, rng));
  std::vector<std::vector<double>> before;
  for (const auto& a : learner.agents()) before.push_back(params(a.policy().actor));
  // agent 1 alone
  DdpgPair& pair = learner.agents()[1].policy();
  const Minibatch mb = learner.agents()[1].buffer().sample(hp.batch_size, rng);
  const Matrix in = critic_input(layout, CriticScope::centralized, 1, mb.state, mb.actions);
  actor_update(pair, columns(mb.state, 2, 2), in, layout.state_width() + 3, hp, 1.0);
  EXPECT_EQ(params(learner.agents()[0].policy().actor), before[0]);
  EXPECT_EQ(params(learner.agents()[2].policy().actor), before[2]);
  EXPECT_NE(params(learner.agents()[1].policy().actor), before[1]);
  EXPECT_EQ(learner.agents()[0].policy().actor_opt.step_count, 0u);
}

TEST(TrainStep, SkippedDuringWarmup) {
  const JointLayout layout{{2, 2}, {2, 2}};
  ActorCriticLearner learner(layout, small_hp(), CriticScope::centralized, 1);
  Rng rng(1);
  for (int k = 0; k < 7; ++k) learner.store(random_transition(layout, rng));
  const auto before = params(learner.agents()[0].policy().critic);
  EXPECT_FALSE(learner.train_step(0, rng).has_value());
  EXPECT_EQ(params(learner.agents()[0].policy().critic), before);
  learner.store(random_transition(layout, rng));
  EXPECT_TRUE(learner.train_step(0, rng).has_value());
}

TEST(TrainStep, WarmupStepsExtendTheGate) {
  const JointLayout layout{{2}, {2}};
  Hyperparameters hp = small_hp();
  hp.warmup_steps = 20;
  ActorCriticLearner learner(layout, hp, CriticScope::centralized, 1);
  Rng rng(1);
  for (int k = 0; k < 19; ++k) learner.store(random_transition(layout, rng));
  EXPECT_FALSE(learner.train_step(0, rng).has_value());
  learner.store(random_transition(layout, rng));
  EXPECT_TRUE(learner.train_step(0, rng).has_value());
}

TEST(TrainStep, LearnEveryGate) {
  const JointLayout layout{{2}, {2}};
  Hyperparameters hp = small_hp();
  hp.learn_every = 5;
  ActorCriticLearner learner(layout, hp, CriticScope::centralized, 1);
  Rng rng(1);
  for (int k = 0; k < 10; ++k) learner.store(random_transition(layout, rng));
  std::vector<int> trained;
  for (int s = 0; s < 20; ++s)
    if (learner.train_step(s, rng)) trained.push_back(s);
  EXPECT_EQ(trained, (std::vector<int>{0, 5, 10, 15}));
}

TEST(TrainStep, TargetsBlendExactly) {
  const JointLayout layout{{3, 3}, {4, 4}};
  Hyperparameters hp = small_hp();
  ActorCriticLearner learner(layout, hp, CriticScope::centralized, 11);
  Rng rng(11);
  for (int step = 0; step < 40; ++step) {
    learner.store(random_transition(layout, rng, step));
    std::vector<std::vector<double>> prev;
    for (const auto& a : learner.agents()) {
      prev.push_back(params(a.policy().actor_target));
      prev.push_back(params(a.policy().critic_target));
    }
    if (!learner.train_step(step, rng)) continue;
    std::size_t idx = 0;
    for (const auto& a : learner.agents()) {
      const std::pair<const Mlp*, const Mlp*> blends[] = {{&a.policy().actor_target, &a.policy().actor},
                                                          {&a.policy().critic_target, &a.policy().critic}};
      for (const auto* pair = blends; pair != blends + 2; ++pair) {
        const auto& old = prev[idx++];
        for (std::size_t k = 0; k < old.size(); ++k) {
          const double expect = hp.tau * pair->second->parameters()[k] + (1.0 - hp.tau) * old[k];
          ASSERT_EQ(pair->first->parameters()[k], expect);
        }
      }
    }
  }
}

TEST(Subpolicy, SingleMemberAlwaysZero) {
  ActorCriticLearner learner({{2}, {2}}, small_hp(), CriticScope::centralized, 1);
  Rng rng(1);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(learner.select_subpolicy(0, rng), 0u);
}

TEST(Subpolicy, UniformOverThree) {
  Hyperparameters hp = small_hp();
  hp.ensemble_size = 3;
  ActorCriticLearner learner({{2}, {2}}, hp, CriticScope::centralized, 1);
  Rng rng(99);
  std::vector<int> freq(3, 0);
  for (int e = 0; e < 30000; ++e) ++freq[learner.select_subpolicy(0, rng)];
  const double sigma = std::sqrt(3e4 * (1.0 / 3) * (2.0 / 3));
  for (int f : freq) EXPECT_LE(std::abs(f - 1e4), 5 * sigma);
}

TEST(Subpolicy, TransitionsStayInTheActiveBuffer) {
  Hyperparameters hp = small_hp();
  hp.ensemble_size = 3;
  const JointLayout layout{{2, 2}, {2, 2}};
  ActorCriticLearner learner(layout, hp, CriticScope::centralized, 1);
  Rng rng(5);
  std::map<std::pair<std::size_t, std::size_t>, std::set<std::int64_t>> expected;
  for (int episode = 0; episode < 30; ++episode) {
    learner.begin_episode(rng);
    for (int t = 0; t < 5; ++t) {
      const std::int64_t tag = episode * 100 + t;
      learner.store(random_transition(layout, rng, tag));
      for (const auto& a : learner.agents()) expected[{a.index, a.active}].insert(tag);
      learner.train_step(tag, rng);
    }
  }
  for (const auto& a : learner.agents()) {
    for (std::size_t k = 0; k < 3; ++k) {
      std::set<std::int64_t> seen;
      for (std::size_t i = 0; i < a.buffers[k]->size(); ++i) seen.insert(a.buffers[k]->at(i).step_index);
      EXPECT_EQ(seen, (expected[{a.index, k}]));
    }
    EXPECT_NE(a.buffers[0].get(), a.buffers[1].get());
  }
}

TEST(Ddpg, CriticWidths) {
  // line-2: two intersections, 8 incoming lanes each, four phases
  const JointLayout layout{{16, 16}, {4, 4}};
  EXPECT_EQ(critic_input_width(layout, CriticScope::local, 0), 20u);
  EXPECT_EQ(critic_input_width(layout, CriticScope::centralized, 0), 40u);
}

namespace {

void expect_same_learners(const ActorCriticLearner& a, const ActorCriticLearner& b) {
  ASSERT_EQ(a.agents().size(), b.agents().size());
  for (std::size_t i = 0; i < a.agents().size(); ++i) {
    const DdpgPair &p = a.agents()[i].policy(), &q = b.agents()[i].policy();
    EXPECT_TRUE(p.actor == q.actor);
    EXPECT_TRUE(p.critic == q.critic);
    EXPECT_TRUE(p.actor_target == q.actor_target);
    EXPECT_TRUE(p.critic_target == q.critic_target);
  }
}

}  // namespace

TEST(Degeneracy, SingleAgentMaddpgEqualsDdpg) {
  const JointLayout layout{{4}, {3}};
  Hyperparameters hp = small_hp();
  ActorCriticLearner maddpg(layout, hp, CriticScope::centralized, 21), ddpg(layout, hp, CriticScope::local, 21);
  Rng env(1), r1(2), r2(2);
  for (int step = 0; step < 100; ++step) {
    const Transition t = random_transition(layout, env, step);
    maddpg.store(t);
    ddpg.store(t);
    maddpg.train_step(step, r1);
    ddpg.train_step(step, r2);
  }
  expect_same_learners(maddpg, ddpg);
  EXPECT_GT(maddpg.agents()[0].policy().critic_opt.step_count, 80u);
}

TEST(Degeneracy, SingleMemberEnsembleEqualsPlainLoop) {
  const JointLayout layout{{3, 2}, {2, 3}};
  Hyperparameters hp = small_hp();
  ActorCriticLearner learner(layout, hp, CriticScope::centralized, 8);
  // plain algorithm written out: one pair and one buffer per agent, no sub-policy draw
  std::vector<DdpgPair> pairs;
  std::vector<ReplayBuffer> buffers;
  for (std::size_t i = 0; i < 2; ++i) {
    pairs.emplace_back(Mlp(actor_layers(layout.observation_widths[i], layout.action_counts[i], hp.fc1, hp.fc2),
                           derive_seed(8, 1, i, 0)),
                       Mlp(critic_layers(critic_input_width(layout, CriticScope::centralized, i), hp.fc1, hp.fc2),
                           derive_seed(8, 2, i, 0)));
    buffers.emplace_back(hp.buffer_capacity, layout.state_width(), layout.action_width(), 2);
  }
  Rng env(3), r1(4), r2(4);
  for (int step = 0; step < 100; ++step) {
    learner.begin_episode(r1);
    const Transition t = random_transition(layout, env, step);
    learner.store(t);
    learner.train_step(step, r1);

    for (auto& b : buffers) b.store(t);
    if (buffers[0].size() < hp.batch_size) continue;
    const Mlp* targets[] = {&pairs[0].actor_target, &pairs[1].actor_target};
    for (std::size_t i = 0; i < 2; ++i) {
      const Minibatch mb = buffers[i].sample(hp.batch_size, r2);
      const auto y = compute_targets(layout, CriticScope::centralized, i, targets, pairs[i].critic_target, mb, hp.gamma);
      const Matrix in = critic_input(layout, CriticScope::centralized, i, mb.state, mb.actions);
      critic_update(pairs[i], in, y, hp);
      actor_update(pairs[i], columns(mb.state, layout.observation_offset(i), layout.observation_widths[i]), in,
                   layout.state_width() + layout.action_offset(i), hp, 1.0);
    }
    for (auto& p : pairs) {
      net::soft_update(p.actor_target, p.actor, hp.tau);
      net::soft_update(p.critic_target, p.critic, hp.tau);
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(learner.agents()[i].policy() == pairs[i]);
  }
}

TEST(Learner, CheckpointRoundTrip) {
  const JointLayout layout{{2, 2}, {2, 2}};
  for (std::size_t k : {1u, 2u}) {
    Hyperparameters hp = small_hp();
    hp.ensemble_size = k;
    ActorCriticLearner a(layout, hp, CriticScope::centralized, 1), b(layout, hp, CriticScope::centralized, 2);
    Rng rng(1);
    for (int s = 0; s < 30; ++s) {
      a.begin_episode(rng);
      a.store(random_transition(layout, rng, s));
      a.train_step(s, rng);
    }
    net::ByteWriter w;
    a.write(w);
    net::ByteReader r(w.bytes());
    b.read(r);
    EXPECT_EQ(r.remaining(), 0u);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(a.agents()[i].active, b.agents()[i].active);
      for (std::size_t m = 0; m < k; ++m) {
        EXPECT_TRUE(a.agents()[i].ensemble[m] == b.agents()[i].ensemble[m]);
        EXPECT_TRUE(*a.agents()[i].buffers[m] == *b.agents()[i].buffers[m]);
      }
    }
    if (k == 1) {
      EXPECT_EQ(b.agents()[0].buffers[0].get(), b.agents()[1].buffers[0].get());
    }
  }
}

TEST(Dqn, JointOutputs) {
  CentralizedDqn dqn({{16, 16}, {4, 4}}, small_hp(), 1, 1000);
  EXPECT_EQ(dqn.joint_actions(), 16u);
  EXPECT_EQ(dqn.q().output_width(), 16u);
  EXPECT_EQ(dqn.decode(7), (std::vector<int>{1, 3}));
  EXPECT_EQ(dqn.encode(std::vector<int>{1, 3}), 7u);
}

TEST(Dqn, GuardRejectsHugeJointSpace) {
  const std::vector<std::size_t> counts(13, 2);
  EXPECT_THROW(joint_action_count(counts, 4096), ConfigError);
  EXPECT_EQ(joint_action_count(std::vector<std::size_t>(12, 2), 4096), 4096u);
  EXPECT_THROW(CentralizedDqn(JointLayout{std::vector<std::size_t>(13, 1), counts}, small_hp(), 1, 10), ConfigError);
}

TEST(Dqn, GreedyPicksFavouredAction) {
  Hyperparameters hp = small_hp();
  hp.epsilon_start = hp.epsilon_end = 0.0;
  CentralizedDqn dqn({{2, 2}, {4, 4}}, hp, 1, 1000);
  std::vector<double> bias(16, 0.0);
  bias[7] = 1.0;
  zero_final_layer(dqn.q(), bias);
  Rng rng(0);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(dqn.act(std::vector<double>{1, 2, 3, 4}, true, rng), 7u);
}

TEST(Dqn, NoBootstrapAtGammaZero) {
  Hyperparameters hp = small_hp();
  hp.gamma = 0.0;
  CentralizedDqn dqn({{2}, {3}}, hp, 1, 1000);
  Rng rng(0);
  for (int k = 0; k < 10; ++k) dqn.store(std::vector<double>{1, 2}, k % 3, -k, std::vector<double>{2, 1}, k);
  const Minibatch mb = dqn.buffer().sample(8, rng);
  const auto y = dqn.compute_targets(mb);
  for (std::size_t b = 0; b < y.size(); ++b) EXPECT_EQ(y[b], mb.rewards(b, 0));
}

TEST(Dqn, EpsilonSchedule) {
  CentralizedDqn dqn({{2}, {3}}, small_hp(), 1, 1000);
  EXPECT_EQ(dqn.epsilon_at(0), 1.0);
  EXPECT_DOUBLE_EQ(dqn.epsilon_at(100), 0.525);
  EXPECT_DOUBLE_EQ(dqn.epsilon_at(200), 0.05);
  EXPECT_DOUBLE_EQ(dqn.epsilon_at(900), 0.05);
}

TEST(Dqn, TrainsAndBlendsTarget) {
  Hyperparameters hp = small_hp();
  CentralizedDqn dqn({{2}, {3}}, hp, 1, 1000);
  Rng rng(0);
  for (int k = 0; k < 8; ++k) dqn.store(std::vector<double>{1, 2}, k % 3, -1.0, std::vector<double>{2, 1}, k);
  const auto old_target = params(dqn.q_target());
  ASSERT_TRUE(dqn.train_step(0, rng).has_value());
  for (std::size_t k = 0; k < old_target.size(); ++k)
    ASSERT_EQ(dqn.q_target().parameters()[k], hp.tau * dqn.q().parameters()[k] + (1 - hp.tau) * old_target[k]);
}

TEST(FixedTime, CyclesInTableOrder) {
  const std::vector<std::size_t> counts{4};
  const auto plan = FixedTimeSchedule::uniform(counts);
  EXPECT_EQ(plan.phase(0, 0), 0);
  EXPECT_EQ(plan.phase(0, 29), 0);
  EXPECT_EQ(plan.phase(0, 30), 1);
  EXPECT_EQ(plan.phase(0, 95), 3);
  for (int t = 0; t < 500; ++t) ASSERT_EQ(plan.phase(0, t), plan.phase(0, t + 120));
}

TEST(FixedTime, SinglePhaseIsConstant) {
  const std::vector<std::size_t> counts{1, 2};
  const auto plan = FixedTimeSchedule::uniform(counts, 10);
  for (int t = 0; t < 100; ++t) ASSERT_EQ(plan.actions(t)[0], 0);
  EXPECT_THROW(FixedTimeSchedule::uniform(counts, 0), ConfigError);
}

TEST(Hyperparameters, DefaultsAndValidation) {
  const Hyperparameters hp;
  EXPECT_EQ(hp.buffer_capacity, 100000u);
  EXPECT_EQ(hp.batch_size, 512u);
  EXPECT_EQ(hp.gamma, 0.95);
  EXPECT_EQ(hp.tau, 0.01);
  EXPECT_EQ(hp.actor_lr, 0.001);
  EXPECT_EQ(hp.critic_lr, 0.001);
  EXPECT_EQ(hp.weight_decay, 0.0);
  EXPECT_EQ(hp.reward_scale, 1.0);
  EXPECT_EQ(hp.noise_std, 0.01);
  EXPECT_EQ(hp.learn_every, 1u);
  EXPECT_TRUE(hp.clip_gradients);
  EXPECT_EQ(hp.clip_norm, 1.0);
  EXPECT_EQ(hp.fc1, 64u);
  EXPECT_EQ(hp.fc2, 64u);
  EXPECT_EQ(hp.ensemble_size, 1u);
  EXPECT_EQ(hp.learning_starts(), 512u);
  EXPECT_NO_THROW(hp.validate());
  Hyperparameters bad = hp;
  bad.gamma = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = hp;
  bad.tau = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = hp;
  bad.batch_size = 200000;
  EXPECT_THROW(bad.validate(), ConfigError);
}
