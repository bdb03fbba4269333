#include "tsc/harness/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "tsc/errors.hpp"

namespace tsc::harness {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

namespace {

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw DecodeError("bad number \"" + s + "\" in CSV");
  return v;
}

std::int64_t to_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw DecodeError("bad integer \"" + s + "\" in CSV");
  return v;
}

std::vector<std::string> fields(const std::string& line, std::size_t n) {
  auto f = split_csv(line);
  if (f.size() != n) throw DecodeError("expected " + std::to_string(n) + " CSV fields in \"" + line + "\"");
  return f;
}

std::vector<std::string> read_lines(const std::filesystem::path& path, std::string_view header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) throw DecodeError(path.string() + ": unexpected CSV header");
  std::vector<std::string> lines;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

void write_lines(const std::filesystem::path& path, std::string_view header, const std::vector<std::string>& lines) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << header << '\n';
    for (const auto& l : lines) out << l << '\n';
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

std::string to_csv_line(const EpisodeRow& r) {
  return std::to_string(r.episode) + ',' + r.algorithm + ',' + std::to_string(r.seed) + ',' +
         format_double(r.total_reward) + ',' + format_double(r.mean_queue) + ',' + format_double(r.mean_delay) +
         ',' + std::to_string(r.throughput);
}

std::string to_csv_line(const StepRow& r) {
  return std::to_string(r.episode) + ',' + std::to_string(r.t) + ',' + std::to_string(r.total_queue) + ',' +
         format_double(r.total_wait) + ',' + std::to_string(r.exits);
}

EpisodeRow parse_episode_line(const std::string& line) {
  const auto f = fields(line, 7);
  EpisodeRow r;
  r.episode = to_int(f[0]);
  r.algorithm = f[1];
  r.seed = std::strtoull(f[2].c_str(), nullptr, 10);
  r.total_reward = to_double(f[3]);
  r.mean_queue = to_double(f[4]);
  r.mean_delay = to_double(f[5]);
  r.throughput = to_int(f[6]);
  return r;
}

StepRow parse_step_line(const std::string& line) {
  const auto f = fields(line, 5);
  return {to_int(f[0]), to_int(f[1]), to_int(f[2]), to_double(f[3]), to_int(f[4])};
}

void write_episode_csv(const std::vector<EpisodeRow>& rows, const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for (const auto& r : rows) lines.push_back(to_csv_line(r));
  write_lines(path, kEpisodeHeader, lines);
}

std::vector<EpisodeRow> read_episode_csv(const std::filesystem::path& path) {
  std::vector<EpisodeRow> rows;
  for (const auto& l : read_lines(path, kEpisodeHeader)) rows.push_back(parse_episode_line(l));
  return rows;
}

void write_step_csv(const std::vector<StepRow>& rows, const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for (const auto& r : rows) lines.push_back(to_csv_line(r));
  write_lines(path, kStepHeader, lines);
}

std::vector<StepRow> read_step_csv(const std::filesystem::path& path) {
  std::vector<StepRow> rows;
  for (const auto& l : read_lines(path, kStepHeader)) rows.push_back(parse_step_line(l));
  return rows;
}

CsvAppender::CsvAppender(const std::filesystem::path& path, std::string_view header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot write " + path.string());
  out_ << header << '\n';
  out_.flush();
  if (!out_) throw IoError("write failed for " + path_.string());
}

void CsvAppender::line(const std::string& text) {
  out_ << text << '\n';
  out_.flush();
  if (!out_) throw IoError("write failed for " + path_.string());
}

}  // namespace tsc::harness
