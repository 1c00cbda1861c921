#pragma once

#include "pulse/categories.hpp"

#include <atomic>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pulse {

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  bool operator==(const LonLat&) const = default;
};

using Ring = std::vector<LonLat>;

/// rings[0] is the outer ring, the rest are holes. Rings are closed.
struct Polygon {
  std::vector<Ring> rings;

  bool operator==(const Polygon&) const = default;
};

/// Polygonal analysis unit plus its land registry inventory.
struct Zone {
  std::string zone_id;
  std::vector<Polygon> parts;  // one part for a Polygon, several for a MultiPolygon
  double area_ha = 0.0;
  CategoryAreas landuse_m2{};
  double built_residential_m2 = 0.0;
  double built_total_m2 = 0.0;

  double landuse(LandUseCategory c) const noexcept { return landuse_m2[index_of(c)]; }
};

using CityCentre = LonLat;

/// Throws InputError naming the zone when an invariant is broken: rings not
/// closed, fewer than three distinct vertices, self-intersecting outer ring,
/// non-positive area, negative or non-finite surfaces, residential > total.
void validate_zone(const Zone& zone);

/// Even-odd test over every ring of every part. Points on an edge follow a
/// half-open convention (left and bottom edges belong to the polygon,
/// right and top edges do not), so a point on an edge shared by two
/// adjacent zones lands in exactly one of them.
bool zone_contains(const Zone& zone, LonLat p) noexcept;

/// Area-weighted planar centroid in lon/lat, holes subtracted.
LonLat centroid(const Zone& zone);

inline constexpr double kEarthRadiusM = 6371008.8;

double haversine_m(LonLat a, LonLat b) noexcept;

/// Great-circle distance from the zone centroid to the centre.
double distance_to_centre(const Zone& zone, CityCentre centre);

/// Immutable point-location index over a zone set. Zones are stored sorted
/// by zone_id and `locate` returns a position in that order. Concurrent
/// queries are safe.
class ZoneIndex {
 public:
  /// Throws InputError on an empty set, a duplicate zone_id or a zone that
  /// fails validate_zone.
  explicit ZoneIndex(std::vector<Zone> zones);

  ZoneIndex(const ZoneIndex&) = delete;
  ZoneIndex& operator=(const ZoneIndex&) = delete;
  ZoneIndex(ZoneIndex&& other) noexcept;
  ZoneIndex& operator=(ZoneIndex&&) = delete;

  std::size_t size() const noexcept { return zones_.size(); }
  const std::vector<Zone>& zones() const noexcept { return zones_; }
  const Zone& zone(std::size_t i) const { return zones_.at(i); }
  std::vector<std::string> zone_ids() const;
  std::optional<std::size_t> find(const std::string& zone_id) const;

  /// Zone containing the point, or nullopt when uncovered. If several zones
  /// claim it, the smallest zone_id wins and overlap_warnings() goes up.
  std::optional<std::size_t> locate(LonLat p) const;
  std::optional<std::string> locate_id(LonLat p) const;

  /// Reference answer scanning every zone.
  std::optional<std::size_t> locate_brute_force(LonLat p) const;

  std::size_t overlap_warnings() const noexcept { return overlaps_.load(); }

  /// Bounding box of all zones as {min, max}.
  std::pair<LonLat, LonLat> bounds() const noexcept { return {min_, max_}; }

 private:
  std::size_t cell_x(double lon) const noexcept;
  std::size_t cell_y(double lat) const noexcept;

  std::vector<Zone> zones_;
  std::vector<std::pair<LonLat, LonLat>> boxes_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  LonLat min_{}, max_{};
  std::size_t nx_ = 1, ny_ = 1;
  double cw_ = 1.0, ch_ = 1.0;
  std::vector<std::vector<std::size_t>> cells_;  // ascending zone positions per cell
  mutable std::atomic<std::size_t> overlaps_{0};
};

// ---- GeoJSON --------------------------------------------------------------

/// Reads a FeatureCollection of Polygon/MultiPolygon features with the zone
/// properties (zone_id, area_ha, built_residential_m2, built_total_m2,
/// lu_<category>_m2). Missing lu_* keys read as 0. Zones are validated.
std::vector<Zone> read_zones_geojson(std::istream& in);
std::vector<Zone> read_zones_geojson_file(const std::string& path);

/// Per-zone values keyed by zone_id; nullopt is written as JSON null.
using ZoneColumn = std::map<std::string, std::optional<double>>;

/// Writes zones with their original properties plus one property per named
/// column. Zones absent from a column get null; a zone_id in a column that
/// matches no zone throws InputError. Values are rounded to 6 significant
/// digits.
void export_geojson(std::ostream& out, std::span<const Zone> zones,
                    const std::vector<std::pair<std::string, ZoneColumn>>& columns = {});

}  // namespace pulse
