#include "tsc/harness/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "tsc/errors.hpp"
#include "tsc/json_io.hpp"

namespace tsc::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint32_t kCheckpointMagic = 0x4b435354;  // "TSCK"
constexpr std::uint32_t kCheckpointVersion = 1;

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string checkpoint_name(std::int64_t episode) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "episode-%06lld.ckpt", static_cast<long long>(episode));
  return buf;
}

void write_row(net::ByteWriter& w, const EpisodeRow& r) { w.str(to_csv_line(r)); }

void write_trace(net::ByteWriter& w, const StepTrace& t) {
  w.u64(t.mean_queue.size());
  w.f64s(t.mean_queue);
  w.f64s(t.mean_delay);
  for (auto v : t.cumulative_exits) w.u64(static_cast<std::uint64_t>(v));
  for (auto v : t.total_queue) w.u64(static_cast<std::uint64_t>(v));
  w.f64s(t.total_wait);
}

StepTrace read_trace(net::ByteReader& r) {
  StepTrace t;
  const std::size_t n = r.u64();
  if (n > r.remaining()) throw DecodeError("checkpoint trace length is corrupt");
  t.mean_queue = r.f64s(n);
  t.mean_delay = r.f64s(n);
  for (std::size_t i = 0; i < n; ++i) t.cumulative_exits.push_back(static_cast<std::int64_t>(r.u64()));
  for (std::size_t i = 0; i < n; ++i) t.total_queue.push_back(static_cast<std::int64_t>(r.u64()));
  t.total_wait = r.f64s(n);
  return t;
}

std::vector<EpisodeRow> read_rows(net::ByteReader& r) {
  const std::size_t n = r.u64();
  if (n > r.remaining()) throw DecodeError("checkpoint row count is corrupt");
  std::vector<EpisodeRow> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(parse_episode_line(r.str()));
  return rows;
}

EpisodeRow mean_row(const std::vector<EpisodeRow>& rows, const std::string& algorithm, std::uint64_t seed) {
  EpisodeRow m;
  m.algorithm = algorithm;
  m.seed = seed;
  double throughput = 0.0;
  for (const auto& r : rows) {
    m.total_reward += r.total_reward;
    m.mean_queue += r.mean_queue;
    m.mean_delay += r.mean_delay;
    throughput += static_cast<double>(r.throughput);
  }
  const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  m.total_reward /= n;
  m.mean_queue /= n;
  m.mean_delay /= n;
  m.throughput = std::llround(throughput / n);
  return m;
}

double mean_reward(const std::vector<EpisodeRow>& rows, std::size_t from, std::size_t to) {
  if (from >= to) return 0.0;
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += rows[i].total_reward;
  return s / static_cast<double>(to - from);
}

}  // namespace

EpisodeOutcome run_episode(env::MarkovGame& game, Controller& controller, const ExperimentConfig& config,
                           std::int64_t episode, std::uint64_t env_seed, EpisodeMode mode, marl::Rng& act_rng,
                           marl::Rng& train_rng) {
  const bool train = mode == EpisodeMode::train;
  EpisodeOutcome out;
  out.row.episode = episode;
  out.row.algorithm = to_string(config.algorithm);
  out.row.seed = config.seed;

  game.reset(env_seed);
  if (train) controller.begin_episode(act_rng);
  Observations obs = game.observe_all();
  std::vector<double> scaled(game.agent_count());
  env::MetricsRecord last;
  double queue_sum = 0.0;
  std::int64_t t = 0;
  while (!game.done()) {
    const Decision d = controller.decide(obs, t, train, act_rng);
    env::StepResult res = game.step(d.phases);
    for (std::size_t i = 0; i < res.rewards.size(); ++i) {
      out.row.total_reward += res.rewards[i];
      scaled[i] = res.rewards[i] * config.hp.reward_scale;
    }
    if (train) {
      controller.record(obs, d, scaled, res.observations, t);
      if (controller.learn(t, train_rng)) ++out.updates;
    }
    last = std::move(res.metrics);
    out.conserved = out.conserved && last.spawned == last.completed_trips + last.in_network + last.virtual_queued;
    queue_sum += last.mean_queue_per_lane;
    out.trace.mean_queue.push_back(last.mean_queue_per_lane);
    out.trace.mean_delay.push_back(last.mean_delay);
    out.trace.cumulative_exits.push_back(last.completed_trips);
    out.trace.total_queue.push_back(last.total_queue);
    out.trace.total_wait.push_back(last.total_wait);
    obs = std::move(res.observations);
    ++t;
  }
  if (!std::isfinite(out.row.total_reward)) throw DivergenceError("episode reward is not finite");
  out.row.mean_queue = t > 0 ? queue_sum / static_cast<double>(t) : 0.0;
  out.row.mean_delay = last.mean_delay;
  out.row.throughput = last.completed_trips;
  return out;
}

void save_checkpoint(const Checkpoint& c, const fs::path& path) {
  net::ByteWriter w;
  w.u32(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.str(c.digest);
  w.u64(static_cast<std::uint64_t>(c.episodes_done));
  w.blob(c.controller);
  w.u64(c.episodes.size());
  for (const auto& r : c.episodes) write_row(w, r);
  w.u64(c.evaluations.size());
  for (const auto& r : c.evaluations) write_row(w, r);
  w.u64(static_cast<std::uint64_t>(c.best_episode));
  write_trace(w, c.best_trace);
  net::seal(w);
  const auto& bytes = w.bytes();
  write_text(path, std::string(bytes.begin(), bytes.end()));
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  net::ByteReader r(net::unseal(bytes));
  if (r.u32() != kCheckpointMagic) throw DecodeError(path.string() + " is not a checkpoint");
  if (const auto v = r.u32(); v != kCheckpointVersion)
    throw DecodeError("checkpoint version " + std::to_string(v) + " is not supported");
  Checkpoint c;
  c.digest = r.str();
  c.episodes_done = static_cast<std::int64_t>(r.u64());
  c.controller = r.blob();
  c.episodes = read_rows(r);
  c.evaluations = read_rows(r);
  c.best_episode = static_cast<std::int64_t>(r.u64());
  c.best_trace = read_trace(r);
  if (r.remaining() != 0) throw DecodeError("trailing bytes in checkpoint");
  return c;
}

Checkpoint load_checkpoint_for(const ExperimentConfig& config, const fs::path& path) {
  Checkpoint c = load_checkpoint(path);
  if (c.digest != config.digest())
    throw DecodeError("checkpoint " + path.string() + " was written for config digest " + c.digest + ", not " +
                      config.digest());
  return c;
}

RunArtifacts run_training(const ExperimentConfig& config, const TrainOptions& options) {
  RunArtifacts art;
  art.dir = options.output_dir ? *options.output_dir : resolve_output_dir(config);
  make_dirs(art.dir / "checkpoints");

  auto game = make_environment(config);
  auto controller = make_controller(config, *game);
  std::int64_t start = 0;
  if (options.resume) {
    Checkpoint c = load_checkpoint_for(config, *options.resume);
    net::ByteReader r(c.controller);
    controller->read(r);
    start = c.episodes_done;
    art.episodes = std::move(c.episodes);
    art.evaluations = std::move(c.evaluations);
    art.best_episode = c.best_episode;
    art.best_trace = std::move(c.best_trace);
    art.updates = controller->updates();
  }

  write_text(art.dir / "config.json", json{{"digest", config.digest()}, {"config", config.canonical()}}.dump(2) + "\n");
  CsvAppender episodes_csv(art.dir / "episodes.csv", kEpisodeHeader);
  for (const auto& r : art.episodes) episodes_csv.line(to_csv_line(r));
  CsvAppender eval_csv(art.dir / "eval.csv", kEpisodeHeader);
  for (const auto& r : art.evaluations) eval_csv.line(to_csv_line(r));
  std::optional<CsvAppender> steps_csv;
  if (config.write_step_csv) {
    // Keep the step rows of episodes the checkpoint already covers.
    std::vector<std::string> kept;
    // Rows past the checkpoint are dropped unparsed; a killed run may have torn the last one.
    if (start > 0 && fs::exists(art.dir / "steps.csv")) {
      std::ifstream in(art.dir / "steps.csv");
      std::string line;
      std::getline(in, line);
      if (line != kStepHeader) throw DecodeError((art.dir / "steps.csv").string() + ": unexpected header");
      while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos || std::stoll(line.substr(0, comma)) > start) break;
        kept.push_back(to_csv_line(parse_step_line(line)));
      }
    }
    steps_csv.emplace(art.dir / "steps.csv", kStepHeader);
    for (const auto& l : kept) steps_csv->line(l);
  }

  for (std::int64_t e = start; e < config.episodes; ++e) {
    const std::int64_t number = e + 1;
    const auto ue = static_cast<std::uint64_t>(e);
    marl::Rng act_rng(marl::derive_seed(config.seed, kActStream, ue));
    marl::Rng train_rng(marl::derive_seed(config.seed, kTrainStream, ue));
    EpisodeOutcome outcome;
    try {
      outcome = run_episode(*game, *controller, config, number, marl::derive_seed(config.seed, kEnvStream, ue),
                            EpisodeMode::train, act_rng, train_rng);
    } catch (const DivergenceError& err) {
      EpisodeRow diag;
      diag.episode = number;
      diag.algorithm = to_string(config.algorithm);
      diag.seed = config.seed;
      diag.total_reward = diag.mean_queue = diag.mean_delay = std::numeric_limits<double>::quiet_NaN();
      diag.throughput = -1;
      episodes_csv.line(to_csv_line(diag));
      throw DivergenceError("episode " + std::to_string(number) + ": " + err.what());
    }
    art.updates += outcome.updates;
    episodes_csv.line(to_csv_line(outcome.row));
    if (steps_csv)
      for (std::size_t k = 0; k < outcome.trace.mean_queue.size(); ++k)
        steps_csv->line(to_csv_line(StepRow{number, static_cast<std::int64_t>(k + 1), outcome.trace.total_queue[k],
                                            outcome.trace.total_wait[k], outcome.trace.cumulative_exits[k]}));
    if (art.episodes.empty() || outcome.row.total_reward > art.episodes[static_cast<std::size_t>(art.best_episode - 1)].total_reward) {
      art.best_episode = number;
      art.best_trace = outcome.trace;
    }
    art.episodes.push_back(outcome.row);
    if (options.log)
      *options.log << to_string(config.algorithm) << " episode " << number << "/" << config.episodes
                   << " reward " << outcome.row.total_reward << " delay " << outcome.row.mean_delay << " throughput "
                   << outcome.row.throughput << "\n"
                   << std::flush;

    if (config.eval_every > 0 && number % config.eval_every == 0) {
      marl::Rng greedy_rng(marl::derive_seed(config.seed, kGreedyStream, ue));
      marl::Rng unused(0);
      EpisodeOutcome g = run_episode(*game, *controller, config, number,
                                     marl::derive_seed(config.seed, kGreedyStream, ue, 1), EpisodeMode::greedy,
                                     greedy_rng, unused);
      eval_csv.line(to_csv_line(g.row));
      art.evaluations.push_back(g.row);
    }

    const bool last = number == config.episodes;
    if (last || (config.checkpoint_every > 0 && number % config.checkpoint_every == 0)) {
      Checkpoint c;
      c.digest = config.digest();
      c.episodes_done = number;
      net::ByteWriter w;
      controller->write(w);
      c.controller = w.take();
      c.episodes = art.episodes;
      c.evaluations = art.evaluations;
      c.best_episode = art.best_episode;
      c.best_trace = art.best_trace;
      const fs::path path = art.dir / "checkpoints" / checkpoint_name(number);
      save_checkpoint(c, path);
      art.checkpoints.push_back(path);
    }
  }

  const std::size_t n = art.episodes.size();
  const std::size_t window = std::min<std::size_t>(100, n);
  art.summary = {{"algorithm", to_string(config.algorithm)},
                 {"seed", config.seed},
                 {"digest", config.digest()},
                 {"episodes", n},
                 {"learning_updates", art.updates},
                 {"mean_reward_all", mean_reward(art.episodes, 0, n)},
                 {"mean_reward_first", mean_reward(art.episodes, 0, window)},
                 {"mean_reward_last", mean_reward(art.episodes, n - window, n)},
                 {"best_episode", art.best_episode},
                 {"csv_schema_version", kCsvSchemaVersion}};
  if (!art.evaluations.empty()) {
    const EpisodeRow m = mean_row(art.evaluations, to_string(config.algorithm), config.seed);
    art.summary["greedy_mean_reward"] = m.total_reward;
    art.summary["greedy_mean_delay"] = m.mean_delay;
  }
  write_text(art.dir / "summary.json", art.summary.dump(2) + "\n");
  return art;
}

EvaluationResult evaluate_controller(const ExperimentConfig& config, Controller& controller, int episodes) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  auto game = make_environment(config);
  EvaluationResult res;
  for (int j = 0; j < episodes; ++j) {
    marl::Rng act_rng(marl::derive_seed(config.seed + static_cast<std::uint64_t>(j), kGreedyStream));
    marl::Rng unused(0);
    EpisodeOutcome o = run_episode(*game, controller, config, j + 1, config.seed + static_cast<std::uint64_t>(j),
                                   EpisodeMode::greedy, act_rng, unused);
    o.row.seed = config.seed + static_cast<std::uint64_t>(j);
    res.conserved = res.conserved && o.conserved;
    res.rows.push_back(o.row);
  }
  res.mean = mean_row(res.rows, to_string(config.algorithm), config.seed);
  return res;
}

EvaluationResult run_evaluation(const ExperimentConfig& config, const std::optional<fs::path>& checkpoint,
                                int episodes) {
  auto game = make_environment(config);
  auto controller = make_controller(config, *game);
  if (checkpoint) {
    Checkpoint c = load_checkpoint_for(config, *checkpoint);
    net::ByteReader r(c.controller);
    controller->read(r);
  } else if (config.algorithm != Algorithm::fixed) {
    throw ConfigError("evaluating a learning controller needs a checkpoint");
  }
  return evaluate_controller(config, *controller, episodes);
}

std::vector<RunArtifacts> compare(const std::vector<ExperimentConfig>& configs, const fs::path& out_dir,
                                  std::ostream* log) {
  if (configs.empty()) throw ConfigError("compare needs at least one config");
  const json fixture0 = configs.front().canonical()["fixture"];
  for (const auto& c : configs) {
    if (c.canonical()["fixture"] != fixture0)
      throw ConfigError("compare: configs use different fixtures or demand (" + c.fixture_path.string() + ")");
    if (c.horizon != configs.front().horizon) throw ConfigError("compare: configs use different horizons");
    if (c.seed != configs.front().seed) throw ConfigError("compare: configs use different seeds");
  }
  make_dirs(out_dir);

  std::vector<std::string> labels;
  std::map<std::string, int> seen;
  for (const auto& c : configs) {
    const std::string name = to_string(c.algorithm);
    const int k = ++seen[name];
    labels.push_back(k == 1 ? name : name + "-" + std::to_string(k));
  }

  std::vector<RunArtifacts> runs;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ExperimentConfig& c = configs[i];
    TrainOptions opt;
    opt.log = log;
    opt.output_dir = out_dir / labels[i];
    RunArtifacts a = run_training(c, opt);
    runs.push_back(std::move(a));
  }

  std::string header;
  for (const auto& l : labels) header += "," + l;

  std::size_t max_episodes = 0;
  for (const auto& r : runs) max_episodes = std::max(max_episodes, r.episodes.size());
  std::string rewards = "episode" + header + "\n";
  for (std::size_t e = 0; e < max_episodes; ++e) {
    rewards += std::to_string(e + 1);
    for (const auto& r : runs) rewards += "," + (e < r.episodes.size() ? format_double(r.episodes[e].total_reward) : "");
    rewards += "\n";
  }

  const std::size_t steps = runs.front().best_trace.mean_queue.size();
  std::string queue = "t" + header + "\n", delay = "t" + header + "\n";
  for (std::size_t t = 0; t < steps; ++t) {
    queue += std::to_string(t + 1);
    delay += std::to_string(t + 1);
    for (const auto& r : runs) {
      queue += "," + format_double(r.best_trace.mean_queue[t]);
      delay += "," + format_double(r.best_trace.mean_delay[t]);
    }
    queue += "\n";
    delay += "\n";
  }
  std::string flow = "minute" + header + "\n";
  for (std::size_t m = 1; m * 60 <= steps; ++m) {
    flow += std::to_string(m);
    for (const auto& r : runs) flow += "," + std::to_string(r.best_trace.cumulative_exits[m * 60 - 1]);
    flow += "\n";
  }
  write_text(out_dir / "rewards.csv", rewards);
  write_text(out_dir / "queue.csv", queue);
  write_text(out_dir / "delay.csv", delay);
  write_text(out_dir / "flow.csv", flow);

  json members = json::array();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    members.push_back({{"label", labels[i]},
                       {"algorithm", to_string(c.algorithm)},
                       {"config_digest", c.digest()},
                       {"episodes", runs[i].episodes.size()},
                       {"best_episode", runs[i].best_episode},
                       {"directory", labels[i]}});
  }
  const json manifest = {{"fixture", configs.front().fixture.name},
                         {"fixture_digest", fnv1a_hex(fixture0.dump())},
                         {"seed", configs.front().seed},
                         {"horizon", configs.front().horizon},
                         {"step_seconds", 1},
                         {"best_episode_rule", "max total_reward, earliest on ties"},
                         {"csv_schema_version", kCsvSchemaVersion},
                         {"members", members}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return runs;
}

}  // namespace tsc::harness
