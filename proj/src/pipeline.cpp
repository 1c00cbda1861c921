#include "pulse/pipeline.hpp"

#include "pulse/csv.hpp"
#include "pulse/digest.hpp"
#include "pulse/error.hpp"
#include "pulse/landuse.hpp"
#include "pulse/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <thread>

namespace pulse {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || p != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key) + ": not a number: '" + std::string(value) + "'");
  }
  return out;
}

fs::path resolve(std::string_view value, const fs::path& base) {
  fs::path p{std::string(value)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

std::string number_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Rethrows a library error with the module name prepended, keeping its type.
template <class F>
auto in_module(std::string_view module, F&& f) -> decltype(f()) {
  const std::string prefix = std::string(module) + ": ";
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const InputError& e) {
    throw InputError(prefix + e.what());
  } catch (const SingularityError& e) {
    throw SingularityError(prefix + e.what());
  } catch (const ClassificationError& e) {
    throw ClassificationError(e.zone_id(), prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

template <class Writer>
std::string render(Writer&& w) {
  std::ostringstream s;
  w(s);
  return s.str();
}

std::size_t row_count(const Artifact& a) {
  if (a.name.ends_with(".geojson")) {
    return nlohmann::json::parse(a.content).at("features").size();
  }
  const auto lines = static_cast<std::size_t>(std::count(a.content.begin(), a.content.end(), '\n'));
  if (a.name.ends_with(".csv")) return lines == 0 ? 0 : lines - 1;
  return lines;
}

// census CSV: zone_id,population
std::map<std::string, double> read_census(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read census file " + path.string());
  std::string line;
  std::vector<std::string> f;
  if (!std::getline(in, line) || !csv::split_row(line, f) || f.size() < 2) {
    throw InputError(path.string() + ": expected header zone_id,population");
  }
  std::map<std::string, double> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    if (!csv::split_row(line, f) || f.size() < 2) {
      throw InputError(path.string() + ":" + std::to_string(n) + ": expected 2 fields");
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), v);
    if (ec != std::errc{} || p != f[1].data() + f[1].size()) {
      throw InputError(path.string() + ":" + std::to_string(n) + ": bad population '" + f[1] + "'");
    }
    out[f[0]] = v;
  }
  return out;
}

struct Joined {
  std::vector<BinnedEvent> events;
  UserRegistry users;
  std::size_t outside = 0;
};

Joined spatial_join(std::span<const GeoEvent> events, const ZoneIndex& index, const TimeZone& tz,
                    unsigned threads) {
  Joined out;
  std::vector<UserId> ids(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) ids[i] = out.users.intern(events[i].user_id);

  std::vector<std::optional<std::size_t>> zone(events.size());
  std::vector<QuarterBin> bins(events.size());
  const std::size_t parts = std::max<std::size_t>(1, std::min<std::size_t>(threads, events.size() / 4096 + 1));
  {
    std::vector<std::jthread> workers;
    for (std::size_t p = 0; p < parts; ++p) {
      workers.emplace_back([&, p] {
        const std::size_t lo = events.size() * p / parts, hi = events.size() * (p + 1) / parts;
        for (std::size_t i = lo; i < hi; ++i) {
          zone[i] = index.locate({events[i].lon, events[i].lat});
          bins[i] = quarter_bin(events[i].instant, tz);
        }
      });
    }
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!zone[i]) {
      ++out.outside;
      continue;
    }
    out.events.push_back({ids[i], static_cast<std::uint32_t>(*zone[i]), bins[i]});
  }
  return out;
}

}  // namespace

// ---- config ----------------------------------------------------------------

PipelineConfig PipelineConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot read config file " + file.string());
  PipelineConfig cfg;
  const fs::path base = file.parent_path();
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(file.string() + ":" + std::to_string(n) + ": expected key = value");
    }
    try {
      cfg.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)), base);
    } catch (const ConfigError& e) {
      throw ConfigError(file.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return cfg;
}

void PipelineConfig::set(std::string_view key, std::string_view value, const fs::path& base) {
  static constexpr std::array<std::string_view, 4> slot_keys = {"slot.morning", "slot.afternoon",
                                                                "slot.evening", "slot.night"};
  if (key == "events") {
    events = resolve(value, base);
  } else if (key == "events_format") {
    events_format = event_format_from_name(value);
    if (!events_format) throw ConfigError("events_format must be ndjson or csv, got '" + std::string(value) + "'");
  } else if (key == "zones") {
    zones = resolve(value, base);
  } else if (key == "census") {
    if (value.empty()) census.reset();
    else census = resolve(value, base);
  } else if (key == "output_dir") {
    output_dir = resolve(value, base);
  } else if (key == "timezone") {
    timezone = std::string(value);
  } else if (key == "centre_lon") {
    centre_lon = parse_number(key, value);
  } else if (key == "centre_lat") {
    centre_lat = parse_number(key, value);
  } else if (key == "home_night") {
    home_night = parse_time_range(value);
  } else if (key == "normalization_total") {
    normalization_total = parse_number(key, value);
    if (!(normalization_total > 0.0)) throw ConfigError("normalization_total must be > 0");
  } else if (key == "alpha") {
    alpha = parse_number(key, value);
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  } else if (key == "predominance_threshold") {
    predominance_threshold = parse_number(key, value);
    if (!(predominance_threshold >= 0.5 && predominance_threshold < 1.0)) {
      throw ConfigError("predominance_threshold must lie in [0.5, 1)");
    }
  } else {
    const auto it = std::find(slot_keys.begin(), slot_keys.end(), key);
    if (it == slot_keys.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
    slots[static_cast<std::size_t>(it - slot_keys.begin())] = parse_time_range(value);
  }
}

std::optional<CityCentre> PipelineConfig::centre() const {
  if (!centre_lon || !centre_lat) return std::nullopt;
  return CityCentre{*centre_lon, *centre_lat};
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("events", events.string());
  out.emplace_back("events_format", events_format ? (*events_format == EventFormat::Csv ? "csv" : "ndjson") : "");
  out.emplace_back("zones", zones.string());
  out.emplace_back("census", census ? census->string() : "");
  out.emplace_back("output_dir", output_dir.string());
  out.emplace_back("timezone", timezone);
  out.emplace_back("centre_lon", centre_lon ? number_text(*centre_lon) : "");
  out.emplace_back("centre_lat", centre_lat ? number_text(*centre_lat) : "");
  for (MajorSlot s : kMajorSlots) {
    out.emplace_back("slot." + std::string(slot_name(s)), format_time_range(slots[static_cast<std::size_t>(s)]));
  }
  out.emplace_back("home_night", format_time_range(home_night));
  out.emplace_back("normalization_total", number_text(normalization_total));
  out.emplace_back("alpha", number_text(alpha));
  out.emplace_back("predominance_threshold", number_text(predominance_threshold));
  return out;
}

std::optional<Stage> stage_from_name(std::string_view name) {
  for (Stage s : {Stage::Ingest, Stage::Aggregate, Stage::Profiles, Stage::Regress, Stage::Run}) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view stage_name(Stage s) noexcept {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Aggregate: return "aggregate";
    case Stage::Profiles: return "profiles";
    case Stage::Regress: return "regress";
    case Stage::Run: return "run";
  }
  return "?";
}

const Artifact* PipelineResult::find(std::string_view name) const {
  for (const Artifact& a : artifacts) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::optional<std::size_t> PipelineResult::count(std::string_view name) const {
  for (const auto& [k, v] : counts) {
    if (k == name) return v;
  }
  return std::nullopt;
}

unsigned worker_threads() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PULSE_THREADS")) {
    unsigned v = 0;
    const std::string_view s(env);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && p == s.data() + s.size() && v > 0) return std::min(v, hw);
  }
  return hw;
}

// ---- stages ----------------------------------------------------------------

PipelineResult compute_pipeline(const PipelineConfig& config, Stage stage) {
  PipelineResult result;
  auto emit = [&](std::string name, std::string content) {
    result.artifacts.push_back({std::move(name), std::move(content)});
  };
  auto warn = [&](std::string w) { result.warnings.push_back(std::move(w)); };
  const unsigned threads = worker_threads();
  const bool needs_zones = stage != Stage::Ingest;

  // inputs must exist before anything runs
  in_module("config", [&] {
    if (config.events.empty()) throw ConfigError("events path not set");
    if (!fs::is_regular_file(config.events)) throw InputError("events file not found: " + config.events.string());
    if (needs_zones) {
      if (config.zones.empty()) throw ConfigError("zones path not set");
      if (!fs::is_regular_file(config.zones)) throw InputError("zones file not found: " + config.zones.string());
    }
    if (stage == Stage::Run && config.census && !fs::is_regular_file(*config.census)) {
      throw InputError("census file not found: " + config.census->string());
    }
    if ((stage == Stage::Regress || stage == Stage::Run) && !config.centre()) {
      throw ConfigError("centre_lon and centre_lat are required for regression");
    }
  });
  const TimeZone tz = in_module("config", [&] { return TimeZone::load(config.timezone); });
  const SlotConfig slots = in_module("config", [&] { return SlotConfig(config.slots); });

  // ingest
  const EventFormat format = in_module("ingest", [&] {
    auto f = config.events_format ? config.events_format : event_format_from_path(config.events);
    if (!f) throw ConfigError("cannot tell the format of " + config.events.string() + "; set events_format");
    return *f;
  });
  ParsedEvents parsed = in_module("ingest", [&] { return read_events_file(config.events, format, threads); });
  std::vector<GeoEvent> workday = filter_workdays(parsed.events, tz);
  result.counts.emplace_back("events_read", parsed.events.size() + parsed.report.rejected_count());
  result.counts.emplace_back("events_rejected", parsed.report.rejected_count());
  result.counts.emplace_back("events_workday", workday.size());
  if (parsed.report.rejected_count() > 0) {
    warn(std::to_string(parsed.report.rejected_count()) + " malformed event rows skipped");
  }
  emit("rejections.csv", render([&](std::ostream& o) { write_rejections_csv(o, parsed.report); }));
  if (stage == Stage::Ingest) {
    emit("events_clean.ndjson", render([&](std::ostream& o) { write_ndjson(o, workday); }));
  }

  if (needs_zones) {
    ZoneIndex index = in_module("spatial", [&] { return ZoneIndex(read_zones_geojson_file(config.zones.string())); });
    const std::vector<Zone>& zones = index.zones();
    const std::vector<std::string> ids = index.zone_ids();
    if (config.centre()) {
      in_module("spatial", [&] {
        const auto [lo, hi] = index.bounds();
        const CityCentre c = *config.centre();
        if (c.lon < lo.lon || c.lon > hi.lon || c.lat < lo.lat || c.lat > hi.lat) {
          throw ConfigError("centre (" + number_text(c.lon) + ", " + number_text(c.lat) +
                            ") lies outside the zone bounding box");
        }
      });
    }
    result.counts.emplace_back("zones", zones.size());

    Joined joined = spatial_join(workday, index, tz, threads);
    result.counts.emplace_back("events_outside_zones", joined.outside);
    result.counts.emplace_back("events_joined", joined.events.size());
    result.counts.emplace_back("users", joined.users.size());
    if (joined.outside > 0) warn(std::to_string(joined.outside) + " events fall outside every zone");
    if (index.overlap_warnings() > 0) {
      warn(std::to_string(index.overlap_warnings()) + " points matched overlapping zones");
    }

    // aggregate
    const ActivityMatrix quarter_counts = count_unique_users_parallel(joined.events, ids, threads);
    const SlotCounts slot_counts = aggregate_major_slots(joined.events, ids, slots);
    const NormalizedMatrix quarter = normalize_counts(quarter_counts, config.normalization_total);
    const NormalizedMatrix slot_norm = normalize_counts(slot_counts, config.normalization_total);
    for (std::size_t c : slot_norm.zero_columns) {
      warn("slot " + slot_norm.bin_labels[c] + " has no active users");
    }
    result.counts.emplace_back("empty_quarter_bins", quarter.zero_columns.size());
    emit("activity_matrix.csv", render([&](std::ostream& o) { write_activity_matrix_csv(o, quarter_counts); }));
    emit("normalized_slots.csv", render([&](std::ostream& o) { write_normalized_csv(o, slot_norm); }));
    emit("slot_stats.csv", render([&](std::ostream& o) {
      o << "slot,n,mean,std_dev,min,max,total\n";
      for (MajorSlot s : kMajorSlots) {
        const Eigen::VectorXd col = slot_norm.values.col(static_cast<Eigen::Index>(s));
        const Descriptives d = slot_descriptives({col.data(), static_cast<std::size_t>(col.size())});
        csv::write_row(o, {std::string(slot_name(s)), std::to_string(d.n), csv::fmt(d.mean), csv::fmt(d.std_dev),
                           csv::fmt(d.min), csv::fmt(d.max), csv::fmt(d.total)});
      }
    }));

    // profiles
    std::vector<std::optional<LandUseClass>> classes;
    std::vector<ZoneClassification> classified;
    if (stage >= Stage::Profiles) {
      classified = classify_zones(zones, PredominanceRule{config.predominance_threshold});
      for (const ZoneClassification& c : classified) {
        classes.push_back(c.cls);
        if (!c.cls) warn("landuse: " + c.error + "; zone left out of profiles");
      }
    }
    if (stage >= Stage::Profiles) {
      emit("classification.csv", render([&](std::ostream& o) { write_classification_csv(o, classified); }));

      const ProfileSet profiles = landuse_profiles(quarter, classes);
      for (const std::string& label : profiles.omitted) warn("class " + label + " has no active users");
      emit("profiles.csv", render([&](std::ostream& o) { write_profiles_csv(o, profiles); }));

      std::vector<double> area;
      for (const Zone& z : zones) area.push_back(z.area_ha);
      const auto summary = summarize_classes(slot_norm, quarter, classes, area);
      emit("class_slots.csv", render([&](std::ostream& o) { write_class_slots_csv(o, summary); }));

      // pairwise r2 and night-referenced residuals
      auto column = [&](MajorSlot s) {
        const Eigen::VectorXd col = slot_norm.values.col(static_cast<Eigen::Index>(s));
        return std::vector<double>(col.data(), col.data() + col.size());
      };
      std::array<std::vector<double>, 4> cols;
      for (MajorSlot s : kMajorSlots) cols[static_cast<std::size_t>(s)] = column(s);
      emit("bivariate_r2.csv", render([&](std::ostream& o) {
        o << "slot,morning,afternoon,evening,night\n";
        for (MajorSlot a : kMajorSlots) {
          std::vector<std::string> row{std::string(slot_name(a))};
          for (MajorSlot b : kMajorSlots) {
            try {
              row.push_back(csv::fmt(bivariate_slot_ols(cols[static_cast<std::size_t>(a)],
                                                        cols[static_cast<std::size_t>(b)]).r2));
            } catch (const InputError&) {
              row.emplace_back();
            }
          }
          csv::write_row(o, row);
        }
      }));
      std::vector<std::pair<std::string, ZoneColumn>> geo;
      for (MajorSlot s : kMajorSlots) {
        ZoneColumn c;
        for (std::size_t z = 0; z < ids.size(); ++z) c[ids[z]] = cols[static_cast<std::size_t>(s)][z];
        geo.emplace_back(std::string(slot_name(s)), std::move(c));
      }
      std::vector<std::string> resid_header{"zone_id"};
      std::vector<Eigen::VectorXd> resid;
      for (MajorSlot s : {MajorSlot::Morning, MajorSlot::Afternoon, MajorSlot::Evening}) {
        const std::string name = "std_resid_" + std::string(slot_name(s)) + "_vs_night";
        ZoneColumn c;
        try {
          const BivariateResult r = bivariate_slot_ols(cols[3], cols[static_cast<std::size_t>(s)]);
          for (std::size_t z = 0; z < ids.size(); ++z) c[ids[z]] = r.std_residuals[static_cast<Eigen::Index>(z)];
          resid.push_back(r.std_residuals);
        } catch (const InputError& e) {
          warn(std::string("bivariate ") + std::string(slot_name(s)) + " vs night: " + e.what());
          for (const std::string& id : ids) c[id] = std::nullopt;
          resid.push_back(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(ids.size()), std::nan("")));
        }
        resid_header.push_back(name);
        geo.emplace_back(name, std::move(c));
      }
      emit("bivariate_residuals.csv", render([&](std::ostream& o) {
        csv::write_row(o, resid_header);
        for (std::size_t z = 0; z < ids.size(); ++z) {
          std::vector<std::string> row{ids[z]};
          for (const Eigen::VectorXd& r : resid) {
            const double v = r[static_cast<Eigen::Index>(z)];
            row.push_back(std::isnan(v) ? std::string() : csv::fmt(v));
          }
          csv::write_row(o, row);
        }
      }));
      emit("zones_slots.geojson", render([&](std::ostream& o) { export_geojson(o, zones, geo); }));
    }

    // regression
    if (stage >= Stage::Regress) {
      const AreaTable table = landuse_area_table(zones);
      std::vector<std::string> names;
      std::vector<Eigen::VectorXd> columns;
      for (LandUseCategory c : kAllCategories) {
        const std::string name = "lu_" + std::string(category_key(c)) + "_m2";
        const Eigen::VectorXd col = table.m2.col(static_cast<Eigen::Index>(index_of(c)));
        if (col.cwiseAbs().maxCoeff() == 0.0) {
          warn("regress: predictor " + name + " is zero in every zone and was left out");
          continue;
        }
        names.push_back(name);
        columns.push_back(col);
      }
      Eigen::VectorXd dist(static_cast<Eigen::Index>(zones.size()));
      for (std::size_t z = 0; z < zones.size(); ++z) {
        dist[static_cast<Eigen::Index>(z)] = distance_to_centre(zones[z], *config.centre());
      }
      names.emplace_back("distance_to_centre_m");
      columns.push_back(dist);
      Eigen::MatrixXd X(static_cast<Eigen::Index>(zones.size()), static_cast<Eigen::Index>(columns.size()));
      for (std::size_t j = 0; j < columns.size(); ++j) X.col(static_cast<Eigen::Index>(j)) = columns[j];

      std::array<std::future<StepwiseResult>, 4> fits;
      for (MajorSlot s : kMajorSlots) {
        const Eigen::VectorXd y = slot_norm.values.col(static_cast<Eigen::Index>(s));
        auto job = [y, &X, &names, alpha = config.alpha] { return stepwise_fit(y, X, names, alpha); };
        fits[static_cast<std::size_t>(s)] =
            std::async(threads > 1 ? std::launch::async : std::launch::deferred, job);
      }
      for (MajorSlot s : kMajorSlots) {
        const std::string slot(slot_name(s));
        const StepwiseResult fit = in_module("stats", [&] {
          try {
            return fits[static_cast<std::size_t>(s)].get();
          } catch (const SingularityError& e) {
            throw SingularityError(slot + " model: " + e.what());
          } catch (const InputError& e) {
            throw InputError(slot + " model: " + e.what());
          }
        });
        if (fit.warning) warn(slot + " model: " + *fit.warning);
        emit("model_" + slot + ".csv", render([&](std::ostream& o) { write_model_csv(o, fit); }));
        emit("residuals_" + slot + ".csv",
             render([&](std::ostream& o) { write_residuals_csv(o, ids, fit.final_fit); }));
      }
    }

    // homes and census
    if (stage == Stage::Run) {
      std::vector<bool> residential(zones.size(), false);
      for (std::size_t z = 0; z < zones.size(); ++z) {
        residential[z] = classes[z] && classes[z]->kind() != LandUseClass::Kind::Activity;
      }
      std::vector<std::vector<ZoneVisit>> visits(joined.users.size());
      for (const BinnedEvent& e : joined.events) visits[e.user].push_back({e.zone, e.bin});

      std::vector<std::pair<std::string, std::uint32_t>> homes;
      std::vector<double> home_counts(zones.size(), 0.0);
      for (UserId u = 0; u < joined.users.size(); ++u) {
        if (auto h = infer_home(visits[u], config.home_night, residential)) {
          homes.emplace_back(joined.users.token(u), *h);
          home_counts[*h] += 1.0;
        }
      }
      std::sort(homes.begin(), homes.end());
      result.counts.emplace_back("users_with_home", homes.size());
      emit("homes.csv", render([&](std::ostream& o) {
        o << "user_id,zone_id\n";
        for (const auto& [u, z] : homes) csv::write_row(o, {u, ids[z]});
      }));

      std::optional<std::vector<double>> census;
      if (config.census) {
        const auto table = in_module("stats", [&] { return read_census(*config.census); });
        census.emplace();
        for (const std::string& id : ids) {
          auto it = table.find(id);
          if (it == table.end()) throw InputError("stats: census has no row for zone " + id);
          census->push_back(it->second);
        }
        for (const auto& [id, v] : table) {
          if (!index.find(id)) warn("census zone " + id + " is not in the zone set");
        }
      }
      emit("home_counts.csv", render([&](std::ostream& o) {
        o << (census ? "zone_id,homes,census\n" : "zone_id,homes\n");
        for (std::size_t z = 0; z < ids.size(); ++z) {
          std::vector<std::string> row{ids[z], csv::fmt(home_counts[z])};
          if (census) row.push_back(csv::fmt((*census)[z]));
          csv::write_row(o, row);
        }
      }));
      if (census) {
        std::string r2;
        try {
          r2 = csv::fmt(census_correlation(home_counts, *census));
        } catch (const InputError& e) {
          warn(std::string("census correlation: ") + e.what());
        }
        emit("census_fit.csv", "n,r2\n" + std::to_string(ids.size()) + "," + r2 + "\n");
      }
    }
  }

  // manifest
  nlohmann::ordered_json m;
  m["stage"] = stage_name(stage);
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  auto input = [&](const char* role, const fs::path& p) {
    inputs.push_back({{"role", role}, {"path", p.string()}, {"sha256", sha256_file(p)}});
  };
  input("events", config.events);
  if (needs_zones) input("zones", config.zones);
  if (stage == Stage::Run && config.census) input("census", *config.census);
  m["inputs"] = inputs;
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.echo()) echo[k] = v;
  m["config"] = echo;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [k, v] : result.counts) counts[k] = v;
  m["counts"] = counts;
  m["warnings"] = result.warnings;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const Artifact& a : result.artifacts) {
    files.push_back({{"file", a.name}, {"rows", row_count(a)}, {"sha256", sha256_hex(a.content)}});
  }
  m["artifacts"] = files;
  emit("manifest.json", m.dump(2) + "\n");
  return result;
}

void write_artifacts(const PipelineResult& result, const fs::path& dir) {
  std::vector<fs::path> written;
  try {
    fs::create_directories(dir);
    for (const Artifact& a : result.artifacts) {
      const fs::path p = dir / a.name;
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      if (!out) throw InputError("cannot write " + p.string());
      written.push_back(p);
      out << a.content;
      out.close();
      if (!out) throw InputError("write failed for " + p.string());
    }
  } catch (...) {
    std::error_code ec;
    for (const fs::path& p : written) fs::remove(p, ec);
    throw;
  }
}

PipelineResult run_pipeline(const PipelineConfig& config, Stage stage) {
  PipelineResult r = compute_pipeline(config, stage);
  write_artifacts(r, config.output_dir);
  return r;
}

}  // namespace pulse
