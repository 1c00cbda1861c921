#pragma once

#include "pulse/activity.hpp"
#include "pulse/ingest.hpp"
#include "pulse/spatial.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pulse {

/// Everything a run needs. Loaded from a flat key=value file; see README.
struct PipelineConfig {
  std::filesystem::path events;
  std::optional<EventFormat> events_format;  // inferred from the extension when empty
  std::filesystem::path zones;
  std::optional<std::filesystem::path> census;
  std::filesystem::path output_dir = "out";
  std::string timezone = "Europe/Madrid";
  std::optional<double> centre_lon;
  std::optional<double> centre_lat;
  std::array<BinRange, 4> slots{BinRange{32, 55}, BinRange{56, 75}, BinRange{76, 87}, BinRange{88, 95}};
  BinRange home_night{88, 95};
  double normalization_total = kDefaultSlotTotal;
  double alpha = 0.01;
  double predominance_threshold = 0.666;

  /// Parses key=value lines; '#' starts a comment. Relative paths resolve
  /// against the file's directory. Throws ConfigError on an unknown key or a
  /// bad value, InputError when the file cannot be read.
  static PipelineConfig load(const std::filesystem::path& file);

  /// Applies one setting. Relative paths resolve against `base`.
  void set(std::string_view key, std::string_view value, const std::filesystem::path& base = {});

  /// Set only when both coordinates are.
  std::optional<CityCentre> centre() const;

  /// Settings in a fixed order, as written to the manifest.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

enum class Stage { Ingest, Aggregate, Profiles, Regress, Run };

std::optional<Stage> stage_from_name(std::string_view name);
std::string_view stage_name(Stage s) noexcept;

struct Artifact {
  std::string name;     // file name inside output_dir
  std::string content;
};

struct PipelineResult {
  std::vector<Artifact> artifacts;  // manifest.json last
  std::vector<std::pair<std::string, std::size_t>> counts;
  std::vector<std::string> warnings;

  const Artifact* find(std::string_view name) const;
  std::optional<std::size_t> count(std::string_view name) const;
};

/// Worker count: PULSE_THREADS when set (and positive), capped at the
/// hardware concurrency.
unsigned worker_threads();

/// Runs every stage up to and including `stage` in memory. Errors are
/// rethrown with the failing module named in the message.
PipelineResult compute_pipeline(const PipelineConfig& config, Stage stage);

/// Writes the artifacts into `dir`. On failure the files written so far are
/// removed before the error propagates.
void write_artifacts(const PipelineResult& result, const std::filesystem::path& dir);

PipelineResult run_pipeline(const PipelineConfig& config, Stage stage);

}  // namespace pulse
