#pragma once

#include "pulse/categories.hpp"
#include "pulse/spatial.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pulse {

/// Predominant land use of a zone: Residential, Mixed, or Activity with
/// exactly one non-residential subcategory.
class LandUseClass {
 public:
  enum class Kind { Residential, Mixed, Activity };

  static LandUseClass residential() { return LandUseClass(Kind::Residential, {}); }
  static LandUseClass mixed() { return LandUseClass(Kind::Mixed, {}); }
  /// Throws std::invalid_argument for LandUseCategory::Residential.
  static LandUseClass activity(LandUseCategory sub);

  Kind kind() const noexcept { return kind_; }
  /// Set only for Kind::Activity.
  std::optional<LandUseCategory> subcategory() const noexcept { return sub_; }

  /// "Residential", "Mixed" or "Activity".
  std::string kind_name() const;
  /// "Residential", "Mixed" or "Activity:<Sub>", e.g. "Activity:Retail".
  std::string label() const;
  static std::optional<LandUseClass> from_label(std::string_view label);

  bool operator==(const LandUseClass&) const = default;

 private:
  LandUseClass(Kind k, std::optional<LandUseCategory> sub) : kind_(k), sub_(sub) {}

  Kind kind_;
  std::optional<LandUseCategory> sub_;
};

/// Residential when the residential share of built surface is above
/// `threshold`; Activity when the non-residential share is above it;
/// Mixed otherwise.
struct PredominanceRule {
  double threshold = 0.666;
};

double residential_fraction(const Zone& zone);

/// Throws ClassificationError when built_total_m2 is 0.
LandUseClass classify_zone(const Zone& zone, const PredominanceRule& rule = {});

struct ZoneClassification {
  std::string zone_id;
  std::optional<LandUseClass> cls;  // empty when classification failed
  double residential_fraction = 0.0;
  std::string error;
};

/// Classifies every zone; failures are recorded, not thrown.
std::vector<ZoneClassification> classify_zones(std::span<const Zone> zones,
                                               const PredominanceRule& rule = {});

void write_classification_csv(std::ostream& out, std::span<const ZoneClassification> rows);

/// Zones x categories in m2. Rows follow sorted zone_id, columns follow
/// kAllCategories.
struct AreaTable {
  std::vector<std::string> zone_ids;
  Eigen::MatrixXd m2;
};

AreaTable landuse_area_table(std::span<const Zone> zones);

}  // namespace pulse
