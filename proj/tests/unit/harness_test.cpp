#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tsc/errors.hpp"
#include "tsc/harness/runner.hpp"
#include "tsc/harness/schema.hpp"
#include "tsc/json_io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace tsc;
using namespace tsc::harness;
using nlohmann::json;

const fs::path kFixtures = TSC_FIXTURE_DIR;
const fs::path kConfigs = TSC_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tsc-harness-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig config(json doc) {
  if (!doc.contains("fixture")) doc["fixture"] = "grid-2x2.json";
  return config_from_json(doc, kFixtures);
}

// Small learning run on the two-intersection line.
json small_learning(const std::string& algorithm) {
  return {{"algorithm", algorithm},
          {"fixture", "line-2.json"},
          {"seed", 5},
          {"episodes", 4},
          {"horizon", 120},
          {"eval_every", 2},
          {"checkpoint_every", 2},
          {"write_step_csv", true},
          {"hyperparameters", {{"batch_size", 16}, {"learn_every", 3}, {"reward_scale", 0.01}}}};
}

TEST(Config, EmptyHyperparametersGiveTableDefaults) {
  const ExperimentConfig c = config({{"algorithm", "maddpg"}, {"hyperparameters", json::object()}});
  EXPECT_EQ(c.hp.buffer_capacity, 100000u);
  EXPECT_EQ(c.hp.batch_size, 512u);
  EXPECT_DOUBLE_EQ(c.hp.gamma, 0.95);
  EXPECT_DOUBLE_EQ(c.hp.tau, 0.01);
  EXPECT_DOUBLE_EQ(c.hp.actor_lr, 0.001);
  EXPECT_DOUBLE_EQ(c.hp.critic_lr, 0.001);
  EXPECT_DOUBLE_EQ(c.hp.weight_decay, 0.0);
  EXPECT_DOUBLE_EQ(c.hp.reward_scale, 1.0);
  EXPECT_DOUBLE_EQ(c.hp.noise_std, 0.01);
  EXPECT_EQ(c.hp.learn_every, 1u);
  EXPECT_TRUE(c.hp.clip_gradients);
  EXPECT_DOUBLE_EQ(c.hp.clip_norm, 1.0);
  EXPECT_EQ(c.hp.fc1, 64u);
  EXPECT_EQ(c.hp.fc2, 64u);
  EXPECT_EQ(c.hp.ensemble_size, 1u);
  EXPECT_EQ(c.episodes, 1000);
  EXPECT_EQ(c.horizon, 3600);
  EXPECT_EQ(c.eval_every, 10);
  EXPECT_EQ(c.algorithm, Algorithm::maddpg);
}

TEST(Config, RewardWeightOrderingNamed) {
  try {
    config({{"algorithm", "maddpg"}, {"reward_weights", {{"a2", 0.3}, {"b2", 0.7}}}});
    FAIL() << "accepted a2 < b2";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("a2 >= b2 violated"), std::string::npos) << e.what();
  }
  try {
    config({{"algorithm", "maddpg"}, {"reward_weights", {{"a2", 0.6}, {"b2", 0.6}}}});
    FAIL() << "accepted a2 + b2 != 1";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("a2 + b2 = 1 violated"), std::string::npos) << e.what();
  }
}

TEST(Config, UnknownAlgorithmIsEnumError) {
  try {
    config({{"algorithm", "sarsa"}});
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("/algorithm"), std::string::npos) << msg;
    EXPECT_NE(msg.find("\"sarsa\" is not one of maddpg, ddpg, dqn, fixed"), std::string::npos) << msg;
  }
}

TEST(Config, ParseErrorReportsLine) {
  const fs::path dir = scratch("parse");
  std::ofstream(dir / "bad.json") << "{\n  \"algorithm\": \"fixed\",\n  \"fixture\" \"x\"\n}\n";
  try {
    load_config(dir / "bad.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Config, SchemaViolationsRejected) {
  EXPECT_THROW(config({{"algorithm", "maddpg"}, {"colour", "red"}}), ConfigError);
  EXPECT_THROW(config({{"algorithm", "maddpg"}, {"horizon", 0}}), ConfigError);
  EXPECT_THROW(config({{"algorithm", "maddpg"}, {"hyperparameters", {{"gamma", 1.0}}}}), ConfigError);
  EXPECT_THROW(config({{"algorithm", "maddpg"}, {"hyperparameters", {{"batch_size", 2.5}}}}), ConfigError);
  EXPECT_THROW(config({{"algorithm", "maddpg"}, {"hyperparameters", {{"tau", 0}}}}), ConfigError);
  EXPECT_THROW(config({{"algorithm", "maddpg"}, {"fixture", "missing.json"}}), ConfigError);
  EXPECT_THROW(config_from_json({{"fixture", "grid-2x2.json"}}, kFixtures), ConfigError);
  // B larger than the buffer can ever hold
  EXPECT_THROW(config({{"algorithm", "maddpg"}, {"hyperparameters", {{"buffer_capacity", 10}}}}), ConfigError);
}

TEST(Config, MissingFileIsIoError) { EXPECT_THROW(load_config(kConfigs / "nope.json"), IoError); }

TEST(Config, EmbeddedSchemaMatchesPublishedFile) {
  EXPECT_EQ(experiment_schema(), read_json_file(fs::path(TSC_SCHEMA_FILE)));
}

TEST(Config, ShippedConfigsValidate) {
  int n = 0;
  for (const auto& entry : fs::recursive_directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(load_config(entry.path()));
    ++n;
  }
  EXPECT_GE(n, 5);
}

TEST(Config, DemandOverrides) {
  const ExperimentConfig base = config({{"algorithm", "fixed"}});
  const ExperimentConfig half = config({{"algorithm", "fixed"}, {"demand_scale", 0.5}});
  ASSERT_EQ(base.fixture.demand.flows.size(), half.fixture.demand.flows.size());
  for (std::size_t f = 0; f < base.fixture.demand.flows.size(); ++f)
    for (std::size_t s = 0; s < base.fixture.demand.flows[f].rates.size(); ++s)
      EXPECT_DOUBLE_EQ(half.fixture.demand.flows[f].rates[s], 0.5 * base.fixture.demand.flows[f].rates[s]);
  const ExperimentConfig one = config(
      {{"algorithm", "fixed"},
       {"demand",
        {{"segment_starts", {0}}, {"flows", {{{"origin", "W0"}, {"destination", "E0"}, {"rates", {0.1}}}}}}}});
  ASSERT_EQ(one.fixture.demand.flows.size(), 1u);
  EXPECT_EQ(one.fixture.demand.segment_starts, (std::vector<int>{0}));
}

TEST(Config, DigestIgnoresOutputDirOnly) {
  const ExperimentConfig a = config({{"algorithm", "maddpg"}, {"output_dir", "x"}});
  const ExperimentConfig b = config({{"algorithm", "maddpg"}, {"output_dir", "y"}});
  const ExperimentConfig c = config({{"algorithm", "maddpg"}, {"seed", 9}});
  const ExperimentConfig d = config({{"algorithm", "maddpg"}, {"demand_scale", 0.9}});
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_NE(a.digest(), c.digest());
  EXPECT_NE(a.digest(), d.digest());
  EXPECT_EQ(a.digest().size(), 16u);
}

TEST(Config, OutputDirEnvironmentOverride) {
  const ExperimentConfig c = config({{"algorithm", "fixed"}, {"output_dir", "from-config"}});
  ::unsetenv("TSC_OUTPUT_DIR");
  EXPECT_EQ(resolve_output_dir(c), fs::path("from-config"));
  ::setenv("TSC_OUTPUT_DIR", "/tmp/elsewhere", 1);
  EXPECT_EQ(resolve_output_dir(c), fs::path("/tmp/elsewhere"));
  ::unsetenv("TSC_OUTPUT_DIR");
}

TEST(Csv, HeadersAreTheDeclaredSchema) {
  EXPECT_EQ(kEpisodeHeader, "episode,algorithm,seed,total_reward,mean_queue,mean_delay,throughput");
  EXPECT_EQ(kStepHeader, "episode,t,total_queue,total_wait,exits");
  const fs::path dir = scratch("csv-header");
  write_episode_csv({}, dir / "e.csv");
  EXPECT_EQ(slurp(dir / "e.csv"), std::string(kEpisodeHeader) + "\n");
}

TEST(Csv, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<EpisodeRow> rows;
  std::vector<StepRow> steps;
  for (int i = 0; i < 200; ++i) {
    rows.push_back({i + 1, "maddpg", rng(), u(rng), std::abs(u(rng)) * 1e-9, std::ldexp(u(rng), -300), i * 7});
    steps.push_back({i / 10, i, i * 3, u(rng) / 3.0, i * 11});
  }
  rows.push_back({999, "fixed", 0, -0.0, 0.1, 1.0 / 3.0, 0});
  const fs::path dir = scratch("csv-rt");
  write_episode_csv(rows, dir / "e.csv");
  write_step_csv(steps, dir / "s.csv");
  EXPECT_EQ(read_episode_csv(dir / "e.csv"), rows);
  EXPECT_EQ(read_step_csv(dir / "s.csv"), steps);
}

TEST(Csv, SeventeenSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_THROW(parse_episode_line("1,maddpg,0,x,0,0,0"), DecodeError);
  EXPECT_THROW(parse_episode_line("1,maddpg,0"), DecodeError);
}

TEST(Training, FixedTimeLearnsNothingButEmitsMetrics) {
  const fs::path dir = scratch("fixed");
  ExperimentConfig c = config({{"algorithm", "fixed"}, {"episodes", 2}, {"horizon", 300}, {"eval_every", 1}});
  TrainOptions opt;
  opt.output_dir = dir;
  const RunArtifacts a = run_training(c, opt);
  EXPECT_EQ(a.updates, 0);
  ASSERT_EQ(a.episodes.size(), 2u);
  EXPECT_EQ(a.evaluations.size(), 2u);
  EXPECT_GT(a.episodes[0].throughput, 0);
  EXPECT_LT(a.episodes[0].total_reward, 0.0);
  EXPECT_EQ(read_episode_csv(dir / "episodes.csv"), a.episodes);
  EXPECT_EQ(read_episode_csv(dir / "eval.csv"), a.evaluations);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_EQ(a.checkpoints.size(), 1u);
}

TEST(Training, EmptyNetworkGivesZeroRewardAndThroughput) {
  const fs::path dir = scratch("empty");
  for (const char* alg : {"fixed", "maddpg"}) {
    ExperimentConfig c =
        config({{"algorithm", alg}, {"episodes", 1}, {"horizon", 10}, {"eval_every", 0}, {"demand_scale", 0.0}});
    TrainOptions opt;
    opt.output_dir = dir / alg;
    const RunArtifacts a = run_training(c, opt);
    ASSERT_EQ(a.episodes.size(), 1u);
    EXPECT_EQ(a.episodes[0].total_reward, 0.0);
    EXPECT_EQ(a.episodes[0].throughput, 0);
  }
}

TEST(Training, SameSeedGivesByteIdenticalCsv) {
  for (const char* alg : {"maddpg", "ddpg", "dqn"}) {
    SCOPED_TRACE(alg);
    const fs::path dir = scratch(std::string("det-") + alg);
    ExperimentConfig c = config(small_learning(alg));
    TrainOptions a, b;
    a.output_dir = dir / "a";
    b.output_dir = dir / "b";
    const RunArtifacts ra = run_training(c, a);
    run_training(c, b);
    EXPECT_GT(ra.updates, 0);
    for (const char* f : {"episodes.csv", "eval.csv", "steps.csv", "checkpoints/episode-000004.ckpt"})
      EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}

TEST(Training, DifferentSeedsDiffer) {
  const fs::path dir = scratch("seeds");
  json doc = small_learning("maddpg");
  TrainOptions a, b;
  a.output_dir = dir / "a";
  b.output_dir = dir / "b";
  run_training(config(doc), a);
  doc["seed"] = 6;
  run_training(config(doc), b);
  EXPECT_NE(slurp(dir / "a" / "episodes.csv"), slurp(dir / "b" / "episodes.csv"));
}

TEST(Training, ResumeMatchesUninterruptedRun) {
  for (const char* alg : {"maddpg", "dqn"}) {
    SCOPED_TRACE(alg);
    const fs::path dir = scratch(std::string("resume-") + alg);
    const ExperimentConfig c = config(small_learning(alg));
    TrainOptions full;
    full.output_dir = dir / "full";
    run_training(c, full);

    // Restart from the mid-run checkpoint in a fresh directory.
    TrainOptions resumed;
    resumed.output_dir = dir / "resumed";
    resumed.resume = dir / "full" / "checkpoints" / "episode-000002.ckpt";
    const RunArtifacts r = run_training(c, resumed);
    EXPECT_EQ(r.episodes.size(), 4u);
    for (const char* f : {"episodes.csv", "eval.csv", "checkpoints/episode-000004.ckpt"})
      EXPECT_EQ(slurp(dir / "full" / f), slurp(dir / "resumed" / f)) << f;
  }
}

TEST(Training, ResumeKeepsEarlierStepRows) {
  const fs::path dir = scratch("resume-steps");
  const ExperimentConfig c = config(small_learning("ddpg"));
  TrainOptions full;
  full.output_dir = dir / "full";
  run_training(c, full);
  TrainOptions again;
  again.output_dir = dir / "full";
  again.resume = dir / "full" / "checkpoints" / "episode-000002.ckpt";
  const std::string before = slurp(dir / "full" / "steps.csv");
  run_training(c, again);
  EXPECT_EQ(slurp(dir / "full" / "steps.csv"), before);
}

TEST(Checkpoint, DigestMismatchRejected) {
  const fs::path dir = scratch("digest");
  json doc = small_learning("maddpg");
  TrainOptions opt;
  opt.output_dir = dir;
  const RunArtifacts a = run_training(config(doc), opt);
  doc["hyperparameters"]["gamma"] = 0.9;
  EXPECT_THROW(load_checkpoint_for(config(doc), a.checkpoints.back()), DecodeError);
  TrainOptions resume;
  resume.output_dir = dir / "r";
  resume.resume = a.checkpoints.front();
  EXPECT_THROW(run_training(config(doc), resume), DecodeError);
  EXPECT_THROW(run_evaluation(config(doc), a.checkpoints.back(), 1), DecodeError);
}

TEST(Checkpoint, CorruptionAndVersionDetected) {
  const fs::path dir = scratch("corrupt");
  TrainOptions opt;
  opt.output_dir = dir;
  const RunArtifacts a = run_training(config(small_learning("ddpg")), opt);
  std::string bytes = slurp(a.checkpoints.back());
  Checkpoint c = load_checkpoint(a.checkpoints.back());
  EXPECT_EQ(c.episodes_done, 4);
  EXPECT_EQ(c.episodes.size(), 4u);

  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x01;
  std::ofstream(dir / "flipped.ckpt", std::ios::binary) << flipped;
  EXPECT_THROW(load_checkpoint(dir / "flipped.ckpt"), DecodeError);

  std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, 40);
  EXPECT_THROW(load_checkpoint(dir / "short.ckpt"), DecodeError);

  // A resealed file with a future version number.
  net::ByteWriter w;
  w.u32(0x4b435354);
  w.u32(99);
  net::seal(w);
  std::ofstream(dir / "v99.ckpt", std::ios::binary).write(reinterpret_cast<const char*>(w.bytes().data()),
                                                          static_cast<std::streamsize>(w.bytes().size()));
  try {
    load_checkpoint(dir / "v99.ckpt");
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_NE(std::string(e.what()).find("version 99"), std::string::npos);
  }
  EXPECT_THROW(load_checkpoint(dir / "absent.ckpt"), IoError);
}

TEST(Evaluation, LeavesLearnableStateUntouched) {
  for (const char* alg : {"maddpg", "ddpg", "dqn"}) {
    SCOPED_TRACE(alg);
    const fs::path dir = scratch(std::string("purity-") + alg);
    const ExperimentConfig c = config(small_learning(alg));
    TrainOptions opt;
    opt.output_dir = dir;
    const RunArtifacts a = run_training(c, opt);

    auto game = make_environment(c);
    auto controller = make_controller(c, *game);
    Checkpoint ck = load_checkpoint_for(c, a.checkpoints.back());
    net::ByteReader r(ck.controller);
    controller->read(r);
    net::ByteWriter before;
    controller->write(before);
    evaluate_controller(c, *controller, 2);
    net::ByteWriter after;
    controller->write(after);
    EXPECT_EQ(before.bytes(), after.bytes());
  }
}

TEST(Evaluation, SeedsGiveDistinctDeterministicRows) {
  ExperimentConfig c = config({{"algorithm", "fixed"}, {"horizon", 900}, {"seed", 40}});
  const EvaluationResult a = run_evaluation(c, std::nullopt, 3);
  const EvaluationResult b = run_evaluation(c, std::nullopt, 3);
  ASSERT_EQ(a.rows.size(), 3u);
  EXPECT_EQ(a.rows, b.rows);
  std::set<double> rewards;
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(a.rows[j].seed, 40u + j);
    rewards.insert(a.rows[j].total_reward);
  }
  EXPECT_EQ(rewards.size(), 3u);
  EXPECT_TRUE(a.conserved);
  EXPECT_NEAR(a.mean.total_reward,
              (a.rows[0].total_reward + a.rows[1].total_reward + a.rows[2].total_reward) / 3.0, 1e-6);
}

TEST(Evaluation, FixedTimeOnGridMovesTraffic) {
  const EvaluationResult r = run_evaluation(config({{"algorithm", "fixed"}}), std::nullopt, 1);
  EXPECT_GT(r.rows[0].throughput, 0);
}

TEST(Evaluation, LearnerWithoutCheckpointRejected) {
  EXPECT_THROW(run_evaluation(config({{"algorithm", "maddpg"}}), std::nullopt, 1), ConfigError);
}

TEST(Compare, DuplicateFixedGivesIdenticalColumns) {
  const fs::path dir = scratch("compare");
  const ExperimentConfig c = config({{"algorithm", "fixed"}, {"episodes", 2}, {"eval_every", 0}});
  compare({c, c}, dir);
  for (const char* f : {"rewards.csv", "queue.csv", "delay.csv", "flow.csv"}) {
    std::ifstream in(dir / f);
    std::string line;
    std::getline(in, line);
    const auto header = split_csv(line);
    ASSERT_EQ(header.size(), 3u) << f;
    EXPECT_EQ(header[1], "fixed");
    EXPECT_EQ(header[2], "fixed-2");
    std::size_t rows = 0;
    std::vector<std::int64_t> prev(2, 0);
    while (std::getline(in, line)) {
      const auto v = split_csv(line);
      EXPECT_EQ(v[1], v[2]) << f << ": " << line;
      if (std::string(f) == "flow.csv")
        for (int k = 0; k < 2; ++k) {
          const std::int64_t x = std::stoll(v[1 + k]);
          EXPECT_GE(x, prev[k]);
          prev[k] = x;
        }
      ++rows;
    }
    const std::map<std::string, std::size_t> expected{
        {"rewards.csv", 2}, {"queue.csv", 3600}, {"delay.csv", 3600}, {"flow.csv", 60}};
    EXPECT_EQ(rows, expected.at(f)) << f;
  }
  const json manifest = read_json_file(dir / "manifest.json");
  EXPECT_EQ(manifest["horizon"], 3600);
  EXPECT_EQ(manifest["step_seconds"], 1);
  EXPECT_EQ(manifest["members"].size(), 2u);
  EXPECT_EQ(manifest["members"][0]["config_digest"], manifest["members"][1]["config_digest"]);
}

TEST(Compare, MismatchedInputsRejected) {
  const fs::path dir = scratch("compare-bad");
  const ExperimentConfig a = config({{"algorithm", "fixed"}, {"episodes", 1}});
  EXPECT_THROW(compare({a, config({{"algorithm", "fixed"}, {"fixture", "line-2.json"}})}, dir), ConfigError);
  EXPECT_THROW(compare({a, config({{"algorithm", "fixed"}, {"demand_scale", 0.5}})}, dir), ConfigError);
  EXPECT_THROW(compare({a, config({{"algorithm", "fixed"}, {"seed", 3}})}, dir), ConfigError);
  EXPECT_THROW(compare({a, config({{"algorithm", "fixed"}, {"horizon", 60}})}, dir), ConfigError);
}

TEST(Training, DivergenceWritesDiagnosticRow) {
  const fs::path dir = scratch("diverge");
  json doc = small_learning("maddpg");
  doc["hyperparameters"]["critic_lr"] = 1e308;
  doc["hyperparameters"]["clip_gradients"] = false;
  TrainOptions opt;
  opt.output_dir = dir;
  try {
    run_training(config(doc), opt);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.category(), ErrorCategory::divergence);
  }
  std::ifstream in(dir / "episodes.csv");
  std::string line, last;
  while (std::getline(in, line)) last = line;
  const auto f = split_csv(last);
  ASSERT_EQ(f.size(), 7u);
  EXPECT_EQ(f[3], "nan");
  EXPECT_EQ(f[6], "-1");
}

TEST(Training, MatrixGameRuns) {
  const fs::path dir = scratch("matrix");
  ExperimentConfig c = config_from_json({{"algorithm", "maddpg"},
                                         {"fixture", "matrix-coop.json"},
                                         {"episodes", 40},
                                         {"eval_every", 0},
                                         {"hyperparameters", {{"batch_size", 8}}}},
                                        kFixtures);
  TrainOptions opt;
  opt.output_dir = dir;
  const RunArtifacts a = run_training(c, opt);
  EXPECT_EQ(a.episodes.size(), 40u);
  EXPECT_EQ(a.updates, 33);  // one per episode once 8 transitions are stored
  EXPECT_THROW(config_from_json({{"algorithm", "fixed"}, {"fixture", "matrix-coop.json"}, {"demand_scale", 0.5}},
                                kFixtures),
               ConfigError);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TSC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodesFollowErrorCategory) {
  const fs::path dir = scratch("cli");
  EXPECT_EQ(run_cli("train"), 2);
  EXPECT_EQ(run_cli("bogus"), 2);
  EXPECT_EQ(run_cli("train --config " + (dir / "absent.json").string()), 4);
  std::ofstream(dir / "sarsa.json") << R"({"algorithm": "sarsa", "fixture": ")" << (kFixtures / "line-2.json").string()
                                    << "\"}";
  EXPECT_EQ(run_cli("train --config " + (dir / "sarsa.json").string()), 3);
  std::ofstream(dir / "fixed.json") << R"({"algorithm": "fixed", "episodes": 1, "horizon": 30, "fixture": ")"
                                    << (kFixtures / "line-2.json").string() << "\"}";
  EXPECT_EQ(run_cli("train --quiet --config " + (dir / "fixed.json").string() + " --out " + (dir / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "episodes.csv"));
  EXPECT_EQ(run_cli("eval --config " + (dir / "fixed.json").string() + " --episodes 2 --out " + (dir / "o").string()),
            0);
  EXPECT_EQ(read_episode_csv(dir / "o" / "evaluation.csv").size(), 2u);
  EXPECT_EQ(run_cli("eval --config " + (dir / "fixed.json").string() + " --checkpoint " + (dir / "absent").string()),
            4);
  ::setenv("TSC_OUTPUT_DIR", (dir / "env").c_str(), 1);
  EXPECT_EQ(run_cli("train --quiet --config " + (dir / "fixed.json").string()), 0);
  ::unsetenv("TSC_OUTPUT_DIR");
  EXPECT_TRUE(fs::exists(dir / "env" / "episodes.csv"));
}

}  // namespace
