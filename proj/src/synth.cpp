#include "pulse/synth.hpp"

#include "pulse/csv.hpp"
#include "pulse/error.hpp"

#include <boost/random/lognormal_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>

namespace pulse::synth {

namespace {

using Rng = boost::random::mt19937_64;

double uniform(Rng& rng) { return boost::random::uniform_01<double>()(rng); }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform(rng); }

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(v[i - 1], v[pick(rng)]);
  }
}

// Random split of `total` into the nine activity categories.
std::array<double, kActivityCategoryCount> random_split(Rng& rng, double total) {
  std::array<double, kActivityCategoryCount> w{};
  double sum = 0.0;
  for (double& x : w) {
    x = -std::log(1.0 - uniform(rng));  // Exp(1): a flat Dirichlet split
    sum += x;
  }
  for (double& x : w) x = total * x / sum;
  return w;
}

// Group labels a zone contributes to, matching landuse_profiles.
std::vector<std::string> groups_of(const LandUseClass& c) {
  if (c.kind() != LandUseClass::Kind::Activity) return {c.label()};
  return {"Activity", c.label()};
}

int group_rank(const std::string& label) {
  if (label == "Residential") return 0;
  if (label == "Mixed") return 1;
  if (label == "Activity") return 2;
  return 3 + static_cast<int>(index_of(*LandUseClass::from_label(label)->subcategory()));
}

std::vector<std::string> ordered_groups(const std::vector<LandUseClass>& classes) {
  std::vector<std::string> labels;
  for (const LandUseClass& c : classes) {
    for (std::string& g : groups_of(c)) {
      if (std::find(labels.begin(), labels.end(), g) == labels.end()) labels.push_back(std::move(g));
    }
  }
  std::sort(labels.begin(), labels.end(),
            [](const std::string& a, const std::string& b) { return group_rank(a) < group_rank(b); });
  return labels;
}

DayCurve normalized(const DayCurve& v) {
  DayCurve out{};
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (s > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / s;
  }
  return out;
}

// Zone rows ordered by class group so that systematic allocation keeps each
// class's per-bin count within one of its expectation.
std::vector<std::size_t> allocation_order(const SynthCity& city) {
  std::vector<std::size_t> order(city.zones.size());
  std::iota(order.begin(), order.end(), 0);
  auto rank = [&](std::size_t z) {
    const LandUseClass& c = city.classes[z];
    return c.kind() == LandUseClass::Kind::Activity ? group_rank(c.label()) : group_rank(c.kind_name());
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });
  return order;
}

std::string padded_id(char prefix, std::size_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

std::string write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << content;
  return p.string();
}

}  // namespace

std::array<DayCurve, kCategoryCount> slot_table_intensities() {
  // morning, afternoon, evening, night
  std::array<std::array<double, 4>, kCategoryCount> slots{};
  slots[index_of(LandUseCategory::Office)] = {5974, 4856, 4289, 2871};
  slots[index_of(LandUseCategory::Industry)] = {2367, 1995, 1730, 1567};
  slots[index_of(LandUseCategory::Retail)] = {2520, 2790, 3046, 1932};
  slots[index_of(LandUseCategory::Health)] = {1378, 964, 745, 473};
  slots[index_of(LandUseCategory::Education)] = {4466, 3187, 2015, 1039};
  slots[index_of(LandUseCategory::Culture)] = {698, 644, 639, 372};
  slots[index_of(LandUseCategory::Transport)] = {1323, 1059, 893, 407};
  slots[index_of(LandUseCategory::ParkSport)] = {2400, 2278, 2403, 1721};
  slots[index_of(LandUseCategory::Other)] = {1974, 1621, 1398, 1313};
  slots[index_of(LandUseCategory::Residential)] = {57022, 61330, 61782, 69784};

  const SlotConfig cfg;
  std::array<DayCurve, kCategoryCount> out{};
  for (LandUseCategory c : kAllCategories) {
    const auto& s = slots[index_of(c)];
    const double early = c == LandUseCategory::Residential ? s[3] : 0.5 * s[3];
    DayCurve& curve = out[index_of(c)];
    for (int b = 0; b < kBinsPerDay; ++b) {
      auto slot = cfg.slot_of(QuarterBin(b));
      double v;
      if (slot) v = s[static_cast<std::size_t>(*slot)];
      else if (b < 28) v = early;
      else v = 0.5 * (early + s[0]);
      curve[static_cast<std::size_t>(b)] = v;
    }
  }
  return out;
}

DayCurve default_platform_activity() {
  constexpr std::array<double, 24> hourly = {3.6, 2.4, 1.6, 1.2, 1.1, 1.2, 1.6, 2.4,
                                             3.4, 3.8, 4.0, 4.3, 4.6, 4.8, 4.9, 4.6,
                                             4.5, 4.8, 5.1, 5.4, 5.9, 6.6, 7.2, 5.6};
  DayCurve out{};
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = hourly[b / 4];
  return normalized(out);
}

std::vector<std::pair<LandUseClass, double>> default_class_mix() {
  std::vector<std::pair<LandUseClass, double>> mix = {{LandUseClass::residential(), 0.5},
                                                      {LandUseClass::mixed(), 0.25}};
  for (LandUseCategory c : kAllCategories) {
    if (c != LandUseCategory::Residential) mix.emplace_back(LandUseClass::activity(c), 0.25 / 9.0);
  }
  return mix;
}

std::vector<std::pair<LandUseClass, double>> parse_class_mix(std::string_view text) {
  std::vector<std::pair<LandUseClass, double>> mix;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("class mix entry '" + std::string(item) + "' lacks '='");
    const auto cls = LandUseClass::from_label(item.substr(0, eq));
    if (!cls) throw ConfigError("unknown class '" + std::string(item.substr(0, eq)) + "'");
    const std::string_view num = item.substr(eq + 1);
    double f = 0.0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), f);
    if (ec != std::errc{} || p != num.data() + num.size()) {
      throw ConfigError("bad fraction '" + std::string(num) + "'");
    }
    mix.emplace_back(*cls, f);
  }
  if (mix.empty()) throw ConfigError("empty class mix");
  return mix;
}

const TruthProfile* SynthEvents::find_truth(std::string_view label) const {
  for (const TruthProfile& p : truth) {
    if (p.label == label) return &p;
  }
  return nullptr;
}

std::vector<std::size_t> allocate_classes(const std::vector<std::pair<LandUseClass, double>>& mix,
                                          std::size_t n_zones) {
  double sum = 0.0;
  for (const auto& [cls, f] : mix) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw ConfigError("class fraction must be finite and >= 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("class fractions sum to " + csv::fmt(sum) + ", not 1");

  std::vector<std::size_t> counts(mix.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const double exact = mix[i].second * double(n_zones);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n_zones && r < remainders.size(); ++r, ++assigned) {
    ++counts[remainders[r].second];
  }
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (mix[i].second > 0.0 && counts[i] == 0) {
      throw ConfigError("class mix infeasible: " + mix[i].first.label() + " gets no zone out of " +
                        std::to_string(n_zones));
    }
  }
  return counts;
}

SynthCity generate_city(const SynthConfig& config) {
  if (config.n_zones == 0) throw ConfigError("n_zones must be >= 1");
  if (!(config.extent_deg > 0.0)) throw ConfigError("extent_deg must be > 0");
  if (config.activity_secondary_share < 0.0 || config.activity_secondary_share > 0.3) {
    throw ConfigError("activity_secondary_share must lie in [0, 0.3]");
  }
  for (const DayCurve& c : config.category_intensity) {
    for (double v : c) {
      if (!std::isfinite(v) || v < 0.0) throw ConfigError("intensities must be finite and >= 0");
    }
  }
  Rng rng(config.seed);

  const std::vector<std::size_t> counts = allocate_classes(config.class_mix, config.n_zones);
  std::vector<LandUseClass> planted;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    planted.insert(planted.end(), counts[i], config.class_mix[i].first);
  }
  shuffle(planted, rng);

  const auto nx = static_cast<std::size_t>(std::ceil(std::sqrt(double(config.n_zones))));
  const std::size_t ny = (config.n_zones + nx - 1) / nx;
  const double cell = config.extent_deg / double(nx);
  const double lon0 = config.centre.lon - cell * double(nx) / 2.0;
  const double lat0 = config.centre.lat - cell * double(ny) / 2.0;
  constexpr double rad = std::numbers::pi / 180.0;

  const int width = std::max<int>(3, static_cast<int>(std::to_string(config.n_zones - 1).size()));
  SynthCity city;
  city.centre = config.centre;
  const double s = config.activity_secondary_share;
  for (std::size_t z = 0; z < config.n_zones; ++z) {
    const std::size_t i = z % nx, j = z / nx;
    const double x0 = lon0 + double(i) * cell, x1 = lon0 + double(i + 1) * cell;
    const double y0 = lat0 + double(j) * cell, y1 = lat0 + double(j + 1) * cell;
    Zone zone;
    zone.zone_id = padded_id('Z', z, width);
    zone.parts.push_back(Polygon{{Ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}}});
    const double height_m = cell * rad * kEarthRadiusM;
    const double width_m = cell * rad * kEarthRadiusM * std::cos(0.5 * (y0 + y1) * rad);
    const double land_m2 = width_m * height_m;
    zone.area_ha = land_m2 / 1e4;

    const double built = land_m2 * uniform(rng, 0.4, 1.2);
    const LandUseClass& cls = planted[z];
    double res_share = 0.0;
    std::array<double, kActivityCategoryCount> other{};
    switch (cls.kind()) {
      case LandUseClass::Kind::Residential:
        res_share = uniform(rng, 0.72, 0.92);
        other = random_split(rng, (1.0 - res_share) * built);
        break;
      case LandUseClass::Kind::Mixed:
        res_share = uniform(rng, 0.40, 0.60);
        other = random_split(rng, (1.0 - res_share) * built);
        break;
      case LandUseClass::Kind::Activity: {
        res_share = s * uniform(rng, 0.25, 1.0);
        const double nonres = (1.0 - res_share) * built;
        other = random_split(rng, s * nonres);
        other[index_of(*cls.subcategory())] += (1.0 - s) * nonres;
        break;
      }
    }
    for (std::size_t c = 0; c < kActivityCategoryCount; ++c) zone.landuse_m2[c] = other[c];
    zone.landuse_m2[index_of(LandUseCategory::Residential)] = res_share * built;
    zone.built_residential_m2 = res_share * built;
    zone.built_total_m2 = std::accumulate(zone.landuse_m2.begin(), zone.landuse_m2.end(), 0.0);
    zone.built_residential_m2 = std::min(zone.built_residential_m2, zone.built_total_m2);
    city.zones.push_back(std::move(zone));
  }
  city.classes = std::move(planted);

  // presence weight per zone and bin
  const auto n = static_cast<Eigen::Index>(config.n_zones);
  CategoryAreas city_m2{};
  for (const Zone& z : city.zones) {
    for (std::size_t c = 0; c < kCategoryCount; ++c) city_m2[c] += z.landuse_m2[c];
  }
  city.weights = Eigen::MatrixXd::Zero(n, kBinsPerDay);
  for (Eigen::Index z = 0; z < n; ++z) {
    const Zone& zone = city.zones[static_cast<std::size_t>(z)];
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      if (!(city_m2[c] > 0.0)) continue;
      const double share = zone.landuse_m2[c] / city_m2[c];
      for (int b = 0; b < kBinsPerDay; ++b) {
        city.weights(z, b) += share * config.category_intensity[c][static_cast<std::size_t>(b)];
      }
    }
    city.centre_distance_m.push_back(distance_to_centre(zone, config.centre));
  }
  const double dmax = *std::max_element(city.centre_distance_m.begin(), city.centre_distance_m.end());
  if (config.centre_attraction > 0.0 && dmax > 0.0) {
    const Eigen::RowVectorXd mean = city.weights.colwise().mean();
    for (Eigen::Index z = 0; z < n; ++z) {
      const double decay = 1.0 - city.centre_distance_m[static_cast<std::size_t>(z)] / dmax;
      city.weights.row(z) += config.centre_attraction * decay * mean;
    }
  }
  return city;
}

std::vector<TruthProfile> intensity_profiles(const SynthCity& city) {
  std::vector<TruthProfile> out;
  for (const std::string& label : ordered_groups(city.classes)) {
    DayCurve per_bin{};
    for (int b = 0; b < kBinsPerDay; ++b) {
      const double total = city.weights.col(b).sum();
      if (!(total > 0.0)) continue;
      double in = 0.0;
      for (std::size_t z = 0; z < city.zones.size(); ++z) {
        const auto g = groups_of(city.classes[z]);
        if (std::find(g.begin(), g.end(), label) != g.end()) in += city.weights(static_cast<Eigen::Index>(z), b);
      }
      per_bin[static_cast<std::size_t>(b)] = in / total;
    }
    out.push_back({label, normalized(per_bin)});
  }
  return out;
}

SynthEvents generate_events(const SynthCity& city, const SynthConfig& config) {
  if (config.n_users == 0) throw ConfigError("n_users must be >= 1");
  if (config.home_bias < 0.0 || config.home_bias > 1.0) throw ConfigError("home_bias must lie in [0, 1]");
  if (config.weeks < 1) throw ConfigError("weeks must be >= 1");
  if (absl::GetWeekday(config.first_tuesday) != absl::Weekday::tuesday) {
    throw ConfigError("first_tuesday is not a Tuesday");
  }
  const TimeZone tz = TimeZone::load(config.timezone);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const std::size_t n_zones = city.zones.size();
  const std::size_t n_users = config.n_users;
  const DayCurve activity = normalized(config.platform_activity);

  SynthEvents out;
  const int width = std::max<int>(5, static_cast<int>(std::to_string(n_users - 1).size()));
  for (std::size_t u = 0; u < n_users; ++u) {
    out.users.push_back(padded_id('u', u, width));
  }

  // posting rate and home per user
  std::vector<double> presences_per_user(n_users);
  boost::random::lognormal_distribution<double> lognormal(
      -0.5 * config.lognormal_sigma * config.lognormal_sigma, config.lognormal_sigma);
  for (std::size_t u = 0; u < n_users; ++u) {
    const double factor = config.lognormal_users ? lognormal(rng) : 1.0;
    presences_per_user[u] = config.events_per_user * factor / (1.0 + config.burst_extra);
  }
  std::vector<double> home_cdf;
  std::vector<std::uint32_t> home_zone;
  double home_mass = 0.0;
  for (std::size_t z = 0; z < n_zones; ++z) {
    if (city.classes[z].kind() == LandUseClass::Kind::Activity) continue;
    const double m2 = city.zones[z].landuse(LandUseCategory::Residential);
    if (!(m2 > 0.0)) continue;
    home_mass += m2;
    home_cdf.push_back(home_mass);
    home_zone.push_back(static_cast<std::uint32_t>(z));
  }
  out.homes.resize(n_users);
  for (std::size_t u = 0; u < n_users && home_mass > 0.0; ++u) {
    const double x = uniform(rng) * home_mass;
    auto it = std::upper_bound(home_cdf.begin(), home_cdf.end(), x);
    if (it == home_cdf.end()) --it;
    out.homes[u] = home_zone[static_cast<std::size_t>(it - home_cdf.begin())];
  }
  out.has_night_event.assign(n_users, false);

  std::vector<absl::CivilDay> days;
  for (int w = 0; w < config.weeks; ++w) {
    for (int d = 0; d < 3; ++d) days.push_back(config.first_tuesday + 7 * w + d);
  }

  const std::vector<std::size_t> order = allocation_order(city);
  const std::vector<std::string> groups = ordered_groups(city.classes);
  std::vector<std::vector<bool>> member(groups.size(), std::vector<bool>(n_zones, false));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t z = 0; z < n_zones; ++z) {
      const auto labels = groups_of(city.classes[z]);
      member[g][z] = std::find(labels.begin(), labels.end(), groups[g]) != labels.end();
    }
  }
  std::vector<DayCurve> expected(groups.size(), DayCurve{});

  boost::random::poisson_distribution<int, double> burst(config.burst_extra > 0 ? config.burst_extra : 1.0);
  std::vector<std::pair<std::size_t, std::uint32_t>> placed;  // (user, zone)
  std::vector<std::size_t> roaming;
  std::vector<double> cdf(n_zones);

  for (int b = 0; b < kBinsPerDay; ++b) {
    const QuarterBin bin(b);
    const bool night = config.night.contains(bin);
    placed.clear();
    roaming.clear();

    double q_total = 0.0, home_total = 0.0;
    std::vector<double> home_by_group(groups.size(), 0.0);
    for (std::size_t u = 0; u < n_users; ++u) {
      const double q = std::min(1.0, presences_per_user[u] * activity[static_cast<std::size_t>(b)]);
      q_total += q;
      if (night && out.homes[u]) {
        home_total += config.home_bias * q;
        for (std::size_t g = 0; g < groups.size(); ++g) {
          if (member[g][*out.homes[u]]) home_by_group[g] += config.home_bias * q;
        }
      }
      if (!(uniform(rng) < q)) continue;
      if (night && out.homes[u] && uniform(rng) < config.home_bias) {
        placed.emplace_back(u, *out.homes[u]);
      } else {
        roaming.push_back(u);
      }
    }

    double w_total = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      w_total += city.weights(static_cast<Eigen::Index>(order[i]), b);
      cdf[i] = w_total;
    }
    if (w_total > 0.0 && !roaming.empty()) {
      shuffle(roaming, rng);
      const double offset = uniform(rng);
      for (std::size_t i = 0; i < roaming.size(); ++i) {
        const double x = (offset + double(i)) / double(roaming.size()) * w_total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        if (it == cdf.end()) --it;
        placed.emplace_back(roaming[i], static_cast<std::uint32_t>(order[static_cast<std::size_t>(it - cdf.begin())]));
      }
    }

    // expected class share in this bin
    const double roam_mass = w_total > 0.0 ? q_total - home_total : 0.0;
    const double t_expected = home_total + roam_mass;
    if (t_expected > 0.0) {
      for (std::size_t g = 0; g < groups.size(); ++g) {
        double w_in = 0.0;
        for (std::size_t z = 0; z < n_zones; ++z) {
          if (member[g][z]) w_in += city.weights(static_cast<Eigen::Index>(z), b);
        }
        const double roam_share = w_total > 0.0 ? w_in / w_total : 0.0;
        expected[g][static_cast<std::size_t>(b)] = (home_by_group[g] + roam_mass * roam_share) / t_expected;
      }
    }

    for (const auto& [u, z] : placed) {
      ++out.presences;
      if (night) out.has_night_event[u] = true;
      const int posts = 1 + (config.burst_extra > 0 ? burst(rng) : 0);
      const Ring& cell = city.zones[z].parts.front().rings.front();
      const double x0 = cell[0].lon, y0 = cell[0].lat, x1 = cell[2].lon, y1 = cell[2].lat;
      for (int p = 0; p < posts; ++p) {
        boost::random::uniform_int_distribution<std::size_t> pick_day(0, days.size() - 1);
        boost::random::uniform_int_distribution<int> pick_minute(0, 14), pick_second(0, 59);
        const absl::CivilDay day = days[pick_day(rng)];
        const int minute = b * 15 + pick_minute(rng);
        const absl::CivilSecond local(day.year(), day.month(), day.day(), minute / 60, minute % 60,
                                      pick_second(rng));
        GeoEvent e;
        e.user_id = out.users[u];
        e.instant = absl::FromCivil(local, tz.zone());
        e.utc_offset_minutes = tz.zone().At(e.instant).offset / 60;
        e.lon = x0 + (x1 - x0) * uniform(rng, 0.01, 0.99);
        e.lat = y0 + (y1 - y0) * uniform(rng, 0.01, 0.99);
        out.events.push_back(std::move(e));
      }
    }
  }

  std::stable_sort(out.events.begin(), out.events.end(), [](const GeoEvent& a, const GeoEvent& b) {
    if (a.instant != b.instant) return a.instant < b.instant;
    return a.user_id < b.user_id;
  });

  for (std::size_t g = 0; g < groups.size(); ++g) out.truth.push_back({groups[g], normalized(expected[g])});
  return out;
}

std::vector<std::filesystem::path> write_city(const std::filesystem::path& dir, const SynthCity& city,
                                              const SynthEvents& events, const SynthConfig& config) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  {
    std::ostringstream s;
    export_geojson(s, city.zones);
    written.emplace_back(write_file(dir / "zones.geojson", s.str()));
  }
  {
    std::ostringstream s;
    write_ndjson(s, events.events);
    written.emplace_back(write_file(dir / "events.ndjson", s.str()));
  }
  {
    std::ostringstream s;
    s << "class,bin,share\n";
    for (const TruthProfile& p : events.truth) {
      for (int b = 0; b < kBinsPerDay; ++b) {
        s << p.label << ',' << b << ',' << csv::fmt(p.shares[static_cast<std::size_t>(b)]) << '\n';
      }
    }
    written.emplace_back(write_file(dir / "profiles_truth.csv", s.str()));
  }
  std::vector<std::size_t> observed_homes(city.zones.size(), 0);
  {
    std::ostringstream s;
    s << "user_id,zone_id\n";
    for (std::size_t u = 0; u < events.users.size(); ++u) {
      if (!events.homes[u]) continue;
      s << events.users[u] << ',' << city.zones[*events.homes[u]].zone_id << '\n';
      if (events.has_night_event[u]) ++observed_homes[*events.homes[u]];
    }
    written.emplace_back(write_file(dir / "homes_truth.csv", s.str()));
  }
  {
    std::ostringstream s;
    s << "zone_id,population\n";
    for (std::size_t z = 0; z < city.zones.size(); ++z) {
      s << city.zones[z].zone_id << ',' << observed_homes[z] << '\n';
    }
    written.emplace_back(write_file(dir / "census.csv", s.str()));
  }
  {
    char centre[96];
    std::snprintf(centre, sizeof centre, "centre_lon = %.10g\ncentre_lat = %.10g\n", city.centre.lon,
                  city.centre.lat);
    std::ostringstream s;
    s << "# synthetic city, seed " << config.seed << "\n"
      << "events = events.ndjson\n"
      << "zones = zones.geojson\n"
      << "census = census.csv\n"
      << "output_dir = out\n"
      << "timezone = " << config.timezone << "\n"
      << centre;
    written.emplace_back(write_file(dir / "pulse.conf", s.str()));
  }
  return written;
}

}  // namespace pulse::synth
