#include "pulse/landuse.hpp"

#include "pulse/csv.hpp"
#include "pulse/error.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pulse {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kNames = {
    "Office",    "Industry",  "Retail", "Health", "Education",
    "Culture",   "Transport", "ParkSport", "Other", "Residential",
};

constexpr std::array<std::string_view, kCategoryCount> kKeys = {
    "office",  "industry",  "retail", "health", "education",
    "culture", "transport", "park",   "other",  "residential",
};

}  // namespace

std::string_view category_name(LandUseCategory c) noexcept { return kNames[index_of(c)]; }

std::string_view category_key(LandUseCategory c) noexcept { return kKeys[index_of(c)]; }

std::optional<LandUseCategory> category_from_name(std::string_view name) noexcept {
  for (LandUseCategory c : kAllCategories) {
    if (name == kNames[index_of(c)] || name == kKeys[index_of(c)]) return c;
  }
  return std::nullopt;
}

LandUseClass LandUseClass::activity(LandUseCategory sub) {
  if (sub == LandUseCategory::Residential) {
    throw std::invalid_argument("activity subcategory cannot be Residential");
  }
  return LandUseClass(Kind::Activity, sub);
}

std::string LandUseClass::kind_name() const {
  switch (kind_) {
    case Kind::Residential: return "Residential";
    case Kind::Mixed: return "Mixed";
    case Kind::Activity: return "Activity";
  }
  return {};
}

std::string LandUseClass::label() const {
  if (kind_ == Kind::Activity) return "Activity:" + std::string(category_name(*sub_));
  return kind_name();
}

std::optional<LandUseClass> LandUseClass::from_label(std::string_view label) {
  if (label == "Residential") return residential();
  if (label == "Mixed") return mixed();
  constexpr std::string_view prefix = "Activity:";
  if (label.starts_with(prefix)) {
    auto sub = category_from_name(label.substr(prefix.size()));
    if (sub && *sub != LandUseCategory::Residential) return activity(*sub);
  }
  return std::nullopt;
}

double residential_fraction(const Zone& zone) {
  if (!(zone.built_total_m2 > 0.0)) {
    throw ClassificationError(zone.zone_id, "built_total_m2 is 0, cannot classify");
  }
  return zone.built_residential_m2 / zone.built_total_m2;
}

LandUseClass classify_zone(const Zone& zone, const PredominanceRule& rule) {
  const double f = residential_fraction(zone);
  if (f > rule.threshold) return LandUseClass::residential();
  if (1.0 - f > rule.threshold) {
    // argmax over the non-residential categories; strict > keeps the
    // earliest category on ties
    LandUseCategory best = LandUseCategory::Office;
    for (LandUseCategory c : kAllCategories) {
      if (c == LandUseCategory::Residential) continue;
      if (zone.landuse(c) > zone.landuse(best)) best = c;
    }
    return LandUseClass::activity(best);
  }
  return LandUseClass::mixed();
}

std::vector<ZoneClassification> classify_zones(std::span<const Zone> zones,
                                               const PredominanceRule& rule) {
  std::vector<ZoneClassification> out;
  out.reserve(zones.size());
  for (const Zone& z : zones) {
    ZoneClassification row{z.zone_id, std::nullopt, 0.0, {}};
    try {
      row.residential_fraction = residential_fraction(z);
      row.cls = classify_zone(z, rule);
    } catch (const ClassificationError& e) {
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_classification_csv(std::ostream& out, std::span<const ZoneClassification> rows) {
  out << "zone_id,class,subcategory,residential_fraction\n";
  for (const ZoneClassification& r : rows) {
    if (!r.cls) {
      csv::write_row(out, {r.zone_id, "Unclassified", "", ""});
      continue;
    }
    const auto sub = r.cls->subcategory();
    csv::write_row(out, {r.zone_id, r.cls->kind_name(),
                         sub ? std::string(category_name(*sub)) : std::string(),
                         csv::fmt(r.residential_fraction)});
  }
}

AreaTable landuse_area_table(std::span<const Zone> zones) {
  std::vector<const Zone*> order;
  order.reserve(zones.size());
  for (const Zone& z : zones) order.push_back(&z);
  std::sort(order.begin(), order.end(),
            [](const Zone* a, const Zone* b) { return a->zone_id < b->zone_id; });

  AreaTable t;
  t.m2.resize(static_cast<Eigen::Index>(order.size()), kCategoryCount);
  for (std::size_t r = 0; r < order.size(); ++r) {
    t.zone_ids.push_back(order[r]->zone_id);
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      t.m2(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = order[r]->landuse_m2[c];
    }
  }
  return t;
}

}  // namespace pulse
