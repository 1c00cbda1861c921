#include "pulse/spatial.hpp"

#include "pulse/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace pulse {

namespace {

[[noreturn]] void zone_error(const Zone& z, const std::string& what) {
  throw InputError("zone '" + z.zone_id + "': " + what);
}

// Orientation of (a, b, c): >0 counter-clockwise, <0 clockwise, 0 collinear.
double orient(LonLat a, LonLat b, LonLat c) noexcept {
  return (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
}

bool on_segment(LonLat a, LonLat b, LonLat p) noexcept {
  return std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon) &&
         std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
}

bool segments_touch(LonLat p1, LonLat p2, LonLat q1, LonLat q2) noexcept {
  const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
         (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

// Vertices without the closing duplicate and without consecutive repeats.
std::vector<LonLat> open_ring(const Ring& ring) {
  std::vector<LonLat> pts;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    if (pts.empty() || !(pts.back() == ring[i])) pts.push_back(ring[i]);
  }
  while (pts.size() > 1 && pts.back() == pts.front()) pts.pop_back();
  return pts;
}

bool self_intersects(const std::vector<LonLat>& pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const LonLat a1 = pts[i], a2 = pts[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // neighbours share a vertex
      if (segments_touch(a1, a2, pts[j], pts[(j + 1) % n])) return true;
    }
  }
  return false;
}

bool ring_crossings(const Ring& ring, LonLat p) noexcept {
  bool inside = false;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    LonLat a = ring[i], b = ring[i + 1];
    if (a.lat == b.lat) continue;
    if (a.lat > b.lat) std::swap(a, b);  // same arithmetic for a shared edge in either direction
    if (p.lat < a.lat || p.lat >= b.lat) continue;
    const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
    if (p.lon < x) inside = !inside;
  }
  return inside;
}

// Returns {signed area, centroid * signed area} relative to `origin`.
std::pair<double, LonLat> ring_moments(const Ring& ring, LonLat origin) noexcept {
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double x0 = ring[i].lon - origin.lon, y0 = ring[i].lat - origin.lat;
    const double x1 = ring[i + 1].lon - origin.lon, y1 = ring[i + 1].lat - origin.lat;
    const double cross = x0 * y1 - x1 * y0;
    a2 += cross;
    cx += (x0 + x1) * cross;
    cy += (y0 + y1) * cross;
  }
  return {a2 / 2.0, LonLat{cx / 6.0, cy / 6.0}};
}

std::pair<LonLat, LonLat> bbox(const Zone& z) {
  LonLat lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
  for (const Polygon& poly : z.parts) {
    for (const LonLat& v : poly.rings.front()) {
      lo.lon = std::min(lo.lon, v.lon);
      lo.lat = std::min(lo.lat, v.lat);
      hi.lon = std::max(hi.lon, v.lon);
      hi.lat = std::max(hi.lat, v.lat);
    }
  }
  return {lo, hi};
}

}  // namespace

void validate_zone(const Zone& z) {
  if (z.zone_id.empty()) throw InputError("zone with empty zone_id");
  if (z.parts.empty()) zone_error(z, "no geometry");
  for (const Polygon& poly : z.parts) {
    if (poly.rings.empty()) zone_error(z, "polygon without rings");
    for (std::size_t r = 0; r < poly.rings.size(); ++r) {
      const Ring& ring = poly.rings[r];
      for (const LonLat& v : ring) {
        if (!std::isfinite(v.lon) || !std::isfinite(v.lat)) zone_error(z, "non-finite vertex");
      }
      if (ring.size() < 2 || !(ring.front() == ring.back())) zone_error(z, "ring not closed");
      std::set<std::pair<double, double>> distinct;
      for (const LonLat& v : ring) distinct.insert({v.lon, v.lat});
      if (distinct.size() < 3) zone_error(z, "degenerate polygon (fewer than 3 distinct vertices)");
    }
    if (self_intersects(open_ring(poly.rings.front()))) {
      zone_error(z, "outer ring self-intersects");
    }
  }
  if (!(z.area_ha > 0.0) || !std::isfinite(z.area_ha)) zone_error(z, "area_ha must be > 0");
  for (LandUseCategory c : kAllCategories) {
    const double v = z.landuse(c);
    if (!std::isfinite(v) || v < 0.0) {
      zone_error(z, "lu_" + std::string(category_key(c)) + "_m2 must be finite and >= 0");
    }
  }
  if (!std::isfinite(z.built_residential_m2) || z.built_residential_m2 < 0.0 ||
      !std::isfinite(z.built_total_m2) || z.built_total_m2 < 0.0) {
    zone_error(z, "built surfaces must be finite and >= 0");
  }
  if (z.built_residential_m2 > z.built_total_m2) {
    zone_error(z, "built_residential_m2 exceeds built_total_m2");
  }
}

bool zone_contains(const Zone& zone, LonLat p) noexcept {
  bool inside = false;
  for (const Polygon& poly : zone.parts) {
    for (const Ring& ring : poly.rings) {
      if (ring_crossings(ring, p)) inside = !inside;
    }
  }
  return inside;
}

LonLat centroid(const Zone& zone) {
  const LonLat origin = zone.parts.front().rings.front().front();
  double area = 0.0, mx = 0.0, my = 0.0;
  for (const Polygon& poly : zone.parts) {
    for (std::size_t r = 0; r < poly.rings.size(); ++r) {
      auto [a, m] = ring_moments(poly.rings[r], origin);
      const double sign = (a < 0 ? -1.0 : 1.0) * (r == 0 ? 1.0 : -1.0);
      area += sign * a;
      mx += sign * m.lon;
      my += sign * m.lat;
    }
  }
  if (area == 0.0) return origin;
  return {origin.lon + mx / area, origin.lat + my / area};
}

double haversine_m(LonLat a, LonLat b) noexcept {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double s = std::sin(dlat / 2), t = std::sin(dlon / 2);
  const double h = s * s + std::cos(a.lat * rad) * std::cos(b.lat * rad) * t * t;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double distance_to_centre(const Zone& zone, CityCentre centre) {
  return haversine_m(centroid(zone), centre);
}

// ---- ZoneIndex ------------------------------------------------------------

ZoneIndex::ZoneIndex(std::vector<Zone> zones) : zones_(std::move(zones)) {
  if (zones_.empty()) throw InputError("zone set is empty");
  std::sort(zones_.begin(), zones_.end(),
            [](const Zone& a, const Zone& b) { return a.zone_id < b.zone_id; });
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    validate_zone(zones_[i]);
    if (!by_id_.emplace(zones_[i].zone_id, i).second) {
      throw InputError("duplicate zone_id '" + zones_[i].zone_id + "'");
    }
  }

  boxes_.reserve(zones_.size());
  min_ = {INFINITY, INFINITY};
  max_ = {-INFINITY, -INFINITY};
  for (const Zone& z : zones_) {
    auto b = bbox(z);
    boxes_.push_back(b);
    min_.lon = std::min(min_.lon, b.first.lon);
    min_.lat = std::min(min_.lat, b.first.lat);
    max_.lon = std::max(max_.lon, b.second.lon);
    max_.lat = std::max(max_.lat, b.second.lat);
  }

  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(double(zones_.size())))) * 2;
  nx_ = ny_ = std::clamp<std::size_t>(side, 1, 1024);
  cw_ = (max_.lon - min_.lon) / double(nx_);
  ch_ = (max_.lat - min_.lat) / double(ny_);
  if (!(cw_ > 0)) cw_ = 1.0;
  if (!(ch_ > 0)) ch_ = 1.0;
  cells_.assign(nx_ * ny_, {});
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    const auto& [lo, hi] = boxes_[i];
    for (std::size_t y = cell_y(lo.lat); y <= cell_y(hi.lat); ++y) {
      for (std::size_t x = cell_x(lo.lon); x <= cell_x(hi.lon); ++x) {
        cells_[y * nx_ + x].push_back(i);
      }
    }
  }
}

ZoneIndex::ZoneIndex(ZoneIndex&& o) noexcept
    : zones_(std::move(o.zones_)),
      boxes_(std::move(o.boxes_)),
      by_id_(std::move(o.by_id_)),
      min_(o.min_),
      max_(o.max_),
      nx_(o.nx_),
      ny_(o.ny_),
      cw_(o.cw_),
      ch_(o.ch_),
      cells_(std::move(o.cells_)),
      overlaps_(o.overlaps_.load()) {}

std::size_t ZoneIndex::cell_x(double lon) const noexcept {
  const double f = std::floor((lon - min_.lon) / cw_);
  return f <= 0 ? 0 : std::min(nx_ - 1, static_cast<std::size_t>(f));
}

std::size_t ZoneIndex::cell_y(double lat) const noexcept {
  const double f = std::floor((lat - min_.lat) / ch_);
  return f <= 0 ? 0 : std::min(ny_ - 1, static_cast<std::size_t>(f));
}

std::vector<std::string> ZoneIndex::zone_ids() const {
  std::vector<std::string> ids;
  ids.reserve(zones_.size());
  for (const Zone& z : zones_) ids.push_back(z.zone_id);
  return ids;
}

std::optional<std::size_t> ZoneIndex::find(const std::string& zone_id) const {
  auto it = by_id_.find(zone_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ZoneIndex::locate(LonLat p) const {
  if (!(p.lon >= min_.lon && p.lon <= max_.lon && p.lat >= min_.lat && p.lat <= max_.lat)) {
    return std::nullopt;
  }
  std::optional<std::size_t> hit;
  for (std::size_t i : cells_[cell_y(p.lat) * nx_ + cell_x(p.lon)]) {
    const auto& [lo, hi] = boxes_[i];
    if (p.lon < lo.lon || p.lon > hi.lon || p.lat < lo.lat || p.lat > hi.lat) continue;
    if (!zone_contains(zones_[i], p)) continue;
    if (hit) {
      overlaps_.fetch_add(1, std::memory_order_relaxed);
      break;
    }
    hit = i;
  }
  return hit;
}

std::optional<std::string> ZoneIndex::locate_id(LonLat p) const {
  auto i = locate(p);
  if (!i) return std::nullopt;
  return zones_[*i].zone_id;
}

std::optional<std::size_t> ZoneIndex::locate_brute_force(LonLat p) const {
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    if (zone_contains(zones_[i], p)) return i;
  }
  return std::nullopt;
}

}  // namespace pulse
