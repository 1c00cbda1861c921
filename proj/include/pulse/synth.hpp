#pragma once

#include "pulse/activity.hpp"
#include "pulse/ingest.hpp"
#include "pulse/landuse.hpp"
#include "pulse/spatial.hpp"

#include <Eigen/Dense>
#include <absl/time/civil_time.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pulse::synth {

using DayCurve = std::array<double, kBinsPerDay>;

/// Per-category presence volume by quarter hour, shaped after observed
/// normalized class-by-slot values for Madrid, held flat within each slot;
/// 00:00-06:59 uses the night value (halved for activity uses) and
/// 07:00-07:59 blends into the morning level.
std::array<DayCurve, kCategoryCount> slot_table_intensities();

/// Hourly platform-usage curve (share of all users active in each hour),
/// low before dawn and peaking at 22:00, expanded to quarter hours and
/// normalized to sum to 1.
DayCurve default_platform_activity();

/// Residential 0.5, Mixed 0.25, and 0.25 split evenly over the nine
/// activity subcategories.
std::vector<std::pair<LandUseClass, double>> default_class_mix();

/// Parses "Residential=0.5,Mixed=0.25,Activity:Retail=0.25". Throws
/// ConfigError on an unknown label or a bad number.
std::vector<std::pair<LandUseClass, double>> parse_class_mix(std::string_view text);

struct SynthConfig {
  std::uint64_t seed = 20130305;
  std::size_t n_zones = 100;
  CityCentre centre{-3.7038, 40.4168};
  double extent_deg = 0.12;  // grid width; cells are square in degrees
  std::vector<std::pair<LandUseClass, double>> class_mix = default_class_mix();

  /// City-wide presence volume drawn by each category's floor space per
  /// bin; a zone receives its m2 share of each category's volume.
  std::array<DayCurve, kCategoryCount> category_intensity = slot_table_intensities();
  DayCurve platform_activity = default_platform_activity();

  std::size_t n_users = 2000;
  double events_per_user = 50.0;   // mean events per user over the study window
  bool lognormal_users = true;     // heavy/light posters
  double lognormal_sigma = 0.8;
  double burst_extra = 0.25;       // mean extra posts per presence (Poisson)
  double home_bias = 0.8;          // P(night presence happens at home)
  BinRange night{88, 95};
  /// Extra attraction of central zones, decaying linearly to zero at the
  /// farthest zone, as a multiple of the mean zone volume.
  double centre_attraction = 0.5;
  /// Share of an activity zone's surface that is not its dominant use.
  double activity_secondary_share = 0.2;

  std::string timezone = "Europe/Madrid";
  absl::CivilDay first_tuesday{2013, 3, 5};
  int weeks = 3;
};

struct SynthCity {
  std::vector<Zone> zones;             // sorted by zone_id
  std::vector<LandUseClass> classes;   // planted class per zone
  Eigen::MatrixXd weights;             // zones x 96 presence weight
  std::vector<double> centre_distance_m;
  CityCentre centre;
};

/// Labelled 96-bin share vector.
struct TruthProfile {
  std::string label;
  DayCurve shares{};
};

struct SynthEvents {
  std::vector<GeoEvent> events;
  std::vector<std::string> users;                    // user tokens, index = user number
  std::vector<std::optional<std::uint32_t>> homes;   // zone row per user
  std::vector<bool> has_night_event;
  /// Expected quarter-hour profile per class group (Residential, Mixed,
  /// Activity, Activity:<Sub>), including the home pull at night.
  std::vector<TruthProfile> truth;
  std::size_t presences = 0;

  const TruthProfile* find_truth(std::string_view label) const;
};

/// Zone counts per class by largest remainder over class_mix, ties to the
/// earlier entry. Throws ConfigError when the mix does not sum to 1 or a
/// class with positive fraction gets no zone.
std::vector<std::size_t> allocate_classes(const std::vector<std::pair<LandUseClass, double>>& mix,
                                          std::size_t n_zones);

/// Grid tessellation with land-use surfaces consistent with each zone's
/// planted class. Deterministic in the seed.
SynthCity generate_city(const SynthConfig& config);

/// Per-class expected profile from the zone weights alone (no home pull).
std::vector<TruthProfile> intensity_profiles(const SynthCity& city);

/// Users, homes and events. Timestamps fall on local Tuesdays, Wednesdays
/// and Thursdays; every point lies strictly inside its zone.
SynthEvents generate_events(const SynthCity& city, const SynthConfig& config);

/// Writes zones.geojson, events.ndjson, profiles_truth.csv, homes_truth.csv,
/// census.csv (true homes of users with a night event) and pulse.conf.
/// Returns the written paths.
std::vector<std::filesystem::path> write_city(const std::filesystem::path& dir,
                                              const SynthCity& city, const SynthEvents& events,
                                              const SynthConfig& config);

}  // namespace pulse::synth
