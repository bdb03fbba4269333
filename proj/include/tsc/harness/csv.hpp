#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace tsc::harness {

/// Bumped whenever a column is added, removed or reordered.
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr std::string_view kEpisodeHeader = "episode,algorithm,seed,total_reward,mean_queue,mean_delay,throughput";
inline constexpr std::string_view kStepHeader = "episode,t,total_queue,total_wait,exits";

struct EpisodeRow {
  std::int64_t episode = 0;  // 1-based
  std::string algorithm;
  std::uint64_t seed = 0;
  double total_reward = 0.0;  // summed over agents and steps, before reward scaling
  double mean_queue = 0.0;    // per controlled lane, averaged over steps
  double mean_delay = 0.0;    // per completed vehicle
  std::int64_t throughput = 0;

  friend bool operator==(const EpisodeRow&, const EpisodeRow&) = default;
};

struct StepRow {
  std::int64_t episode = 0;
  std::int64_t t = 0;  // 1-based, after the step
  std::int64_t total_queue = 0;
  double total_wait = 0.0;
  std::int64_t exits = 0;  // cumulative within the episode

  friend bool operator==(const StepRow&, const StepRow&) = default;
};

/// %.17g, so a parse returns the same double.
std::string format_double(double v);

std::string to_csv_line(const EpisodeRow& r);
std::string to_csv_line(const StepRow& r);
EpisodeRow parse_episode_line(const std::string& line);
StepRow parse_step_line(const std::string& line);

/// Whole-file helpers; writes go through a temporary and a rename.
void write_episode_csv(const std::vector<EpisodeRow>& rows, const std::filesystem::path& path);
std::vector<EpisodeRow> read_episode_csv(const std::filesystem::path& path);
void write_step_csv(const std::vector<StepRow>& rows, const std::filesystem::path& path);
std::vector<StepRow> read_step_csv(const std::filesystem::path& path);

/// Comma-separated fields, no quoting (none of the schemas need it).
std::vector<std::string> split_csv(const std::string& line);

/// Appending writer that fails loudly (IoError) on any stream error, e.g. a full disk.
class CsvAppender {
 public:
  CsvAppender(const std::filesystem::path& path, std::string_view header);
  void line(const std::string& text);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace tsc::harness
