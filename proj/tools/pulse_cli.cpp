// pulse: geotagged activity pipeline from the command line.

#include "pulse/error.hpp"
#include "pulse/pipeline.hpp"
#include "pulse/synth.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> events, events_format, zones, census, out, timezone, night;
  std::optional<double> centre_lon, centre_lat, alpha;
};

void add_pipeline_flags(CLI::App* cmd, Overrides& o, bool analysis) {
  cmd->add_option("--config", o.config, "key=value config file");
  cmd->add_option("--events", o.events, "events file (.ndjson or .csv)");
  cmd->add_option("--events-format", o.events_format, "ndjson or csv");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--timezone", o.timezone, "IANA timezone of the study city");
  if (!analysis) return;
  cmd->add_option("--zones", o.zones, "zones GeoJSON");
  cmd->add_option("--census", o.census, "census CSV zone_id,population");
  cmd->add_option("--centre-lon", o.centre_lon, "city centre longitude");
  cmd->add_option("--centre-lat", o.centre_lat, "city centre latitude");
  cmd->add_option("--alpha", o.alpha, "stepwise significance level");
  cmd->add_option("--home-night", o.night, "night range for home inference, HH:MM-HH:MM");
}

pulse::PipelineConfig build_config(const Overrides& o) {
  pulse::PipelineConfig cfg;
  if (!o.config.empty()) cfg = pulse::PipelineConfig::load(o.config);
  auto set = [&](const char* key, const std::optional<std::string>& v) {
    if (v) cfg.set(key, *v);
  };
  set("events", o.events);
  set("events_format", o.events_format);
  set("zones", o.zones);
  set("census", o.census);
  set("output_dir", o.out);
  set("timezone", o.timezone);
  set("home_night", o.night);
  if (o.centre_lon) cfg.centre_lon = *o.centre_lon;
  if (o.centre_lat) cfg.centre_lat = *o.centre_lat;
  if (o.alpha) cfg.set("alpha", std::to_string(*o.alpha));
  return cfg;
}

int run_stage(const Overrides& o, pulse::Stage stage) {
  const pulse::PipelineConfig cfg = build_config(o);
  const pulse::PipelineResult r = pulse::run_pipeline(cfg, stage);
  for (const std::string& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "wrote " << r.artifacts.size() << " files to " << cfg.output_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unique active users per zone and quarter hour, land-use profiles and slot regressions"};
  app.require_subcommand(1);

  Overrides ingest_o, aggregate_o, profiles_o, regress_o, run_o;
  auto* ingest = app.add_subcommand("ingest", "parse and filter events; write events_clean.ndjson and rejections.csv");
  add_pipeline_flags(ingest, ingest_o, false);
  auto* aggregate = app.add_subcommand("aggregate", "spatial join, unique-user counts and normalization");
  add_pipeline_flags(aggregate, aggregate_o, true);
  auto* profiles = app.add_subcommand("profiles", "aggregate + land-use classes, profiles and slot correlations");
  add_pipeline_flags(profiles, profiles_o, true);
  auto* regress = app.add_subcommand("regress", "profiles + stepwise slot models");
  add_pipeline_flags(regress, regress_o, true);
  auto* run = app.add_subcommand("run", "full pipeline including home inference");
  add_pipeline_flags(run, run_o, true);

  pulse::synth::SynthConfig sc;
  std::string synth_out = "synth_city";
  bool flat_users = false;
  auto* synth = app.add_subcommand("synth", "write a synthetic city with known profiles and homes");
  synth->add_option("--out", synth_out, "output directory")->capture_default_str();
  synth->add_option("--seed", sc.seed, "random seed")->capture_default_str();
  synth->add_option("--n-zones", sc.n_zones, "number of grid zones")->capture_default_str();
  synth->add_option("--n-users", sc.n_users, "number of users")->capture_default_str();
  synth->add_option("--events-per-user", sc.events_per_user, "mean events per user over the window")
      ->capture_default_str();
  synth->add_option("--home-bias", sc.home_bias, "probability a night presence is at home")->capture_default_str();
  synth->add_option("--centre-attraction", sc.centre_attraction, "extra pull of central zones")
      ->capture_default_str();
  synth->add_option("--weeks", sc.weeks, "weeks of Tue-Thu data")->capture_default_str();
  synth->add_option("--timezone", sc.timezone, "IANA timezone")->capture_default_str();
  std::string class_mix;
  synth->add_option("--class-mix", class_mix, "e.g. Residential=0.5,Mixed=0.25,Activity:Retail=0.25");
  synth->add_flag("--flat-users", flat_users, "every user posts at the same mean rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest) return run_stage(ingest_o, pulse::Stage::Ingest);
    if (*aggregate) return run_stage(aggregate_o, pulse::Stage::Aggregate);
    if (*profiles) return run_stage(profiles_o, pulse::Stage::Profiles);
    if (*regress) return run_stage(regress_o, pulse::Stage::Regress);
    if (*run) return run_stage(run_o, pulse::Stage::Run);
    if (*synth) {
      sc.lognormal_users = !flat_users;
      if (!class_mix.empty()) sc.class_mix = pulse::synth::parse_class_mix(class_mix);
      const auto city = pulse::synth::generate_city(sc);
      const auto events = pulse::synth::generate_events(city, sc);
      const auto files = pulse::synth::write_city(synth_out, city, events, sc);
      std::cout << "wrote " << files.size() << " files (" << events.events.size() << " events) to " << synth_out
                << '\n';
      return 0;
    }
  } catch (const pulse::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pulse::SingularityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pulse::ClassificationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
