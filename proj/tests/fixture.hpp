#pragma once

// Helpers shared by the pipeline tests and the acceptance binary: build a
// synthetic city on disk, run the pipeline on it, read CSV artifacts back.

#include "pulse/csv.hpp"
#include "pulse/pipeline.hpp"
#include "pulse/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

namespace fixture {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("pulse_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct City {
  pulse::synth::SynthConfig config;
  pulse::synth::SynthCity city;
  pulse::synth::SynthEvents events;
  fs::path dir;

  pulse::PipelineConfig pipeline_config() const {
    return pulse::PipelineConfig::load(dir / "pulse.conf");
  }
};

inline City make_city(const fs::path& dir, const pulse::synth::SynthConfig& config) {
  City c{config, pulse::synth::generate_city(config), {}, dir};
  c.events = pulse::synth::generate_events(c.city, config);
  pulse::synth::write_city(dir, c.city, c.events, config);
  return c;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

using Table = std::vector<std::vector<std::string>>;

/// Rows including the header.
inline Table parse_csv(const std::string& text) {
  Table rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    if (!pulse::csv::split_row(line, fields)) throw std::runtime_error("bad csv row: " + line);
    rows.push_back(std::move(fields));
  }
  return rows;
}

/// class label -> 96 shares, from a class,bin,share table.
inline std::map<std::string, std::vector<double>> read_profiles(const std::string& text) {
  std::map<std::string, std::vector<double>> out;
  const Table t = parse_csv(text);
  for (std::size_t i = 1; i < t.size(); ++i) {
    auto& v = out[t[i][0]];
    v.resize(96);
    v.at(std::stoul(t[i][1])) = std::stod(t[i][2]);
  }
  return out;
}

inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1 size mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

/// Worst L1 distance between the recovered and the planted profiles, over
/// every class label present in both. `worst_label` receives the culprit.
inline double worst_profile_l1(const std::string& recovered_csv, const std::string& truth_csv,
                               std::string* worst_label = nullptr, std::size_t* compared = nullptr) {
  const auto got = read_profiles(recovered_csv);
  const auto want = read_profiles(truth_csv);
  double worst = 0;
  std::size_t n = 0;
  for (const auto& [label, shares] : want) {
    const auto it = got.find(label);
    if (it == got.end()) continue;
    ++n;
    const double d = l1(it->second, shares);
    if (d >= worst) {
      worst = d;
      if (worst_label) *worst_label = label;
    }
  }
  if (compared) *compared = n;
  return worst;
}

/// zone_id -> row for a table keyed by its first column.
inline std::map<std::string, std::vector<std::string>> by_key(const Table& t) {
  std::map<std::string, std::vector<std::string>> out;
  for (std::size_t i = 1; i < t.size(); ++i) out[t[i][0]] = t[i];
  return out;
}

/// Coefficient of `name` in a model CSV, or nullopt when it was dropped.
inline std::optional<double> model_value(const std::string& model_csv, const std::string& name) {
  for (const auto& row : parse_csv(model_csv)) {
    if (row.size() >= 2 && row[0] == name && !row[1].empty()) return std::stod(row[1]);
  }
  return std::nullopt;
}

}  // namespace fixture
