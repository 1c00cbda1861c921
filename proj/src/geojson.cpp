#include "pulse/csv.hpp"
#include "pulse/error.hpp"
#include "pulse/spatial.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace pulse {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

Ring read_ring(const json& j, const std::string& id) {
  if (!j.is_array()) throw InputError("zone '" + id + "': ring is not an array");
  Ring ring;
  ring.reserve(j.size());
  for (const json& v : j) {
    if (!v.is_array() || v.size() < 2 || !v[0].is_number() || !v[1].is_number()) {
      throw InputError("zone '" + id + "': bad vertex");
    }
    ring.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  return ring;
}

Polygon read_polygon(const json& j, const std::string& id) {
  if (!j.is_array() || j.empty()) throw InputError("zone '" + id + "': empty polygon");
  Polygon poly;
  for (const json& r : j) poly.rings.push_back(read_ring(r, id));
  return poly;
}

double number_prop(const json& props, const std::string& key, const std::string& id,
                   std::optional<double> fallback) {
  auto it = props.find(key);
  if (it == props.end() || it->is_null()) {
    if (fallback) return *fallback;
    throw InputError("zone '" + id + "': missing property " + key);
  }
  if (!it->is_number()) throw InputError("zone '" + id + "': property " + key + " not a number");
  return it->get<double>();
}

ordered_json ring_json(const Ring& ring) {
  ordered_json out = ordered_json::array();
  for (const LonLat& v : ring) out.push_back({v.lon, v.lat});
  return out;
}

ordered_json polygon_json(const Polygon& poly) {
  ordered_json out = ordered_json::array();
  for (const Ring& r : poly.rings) out.push_back(ring_json(r));
  return out;
}

double round6(double v) { return std::stod(csv::fmt(v)); }

}  // namespace

std::vector<Zone> read_zones_geojson(std::istream& in) {
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw InputError("zones file is not valid JSON");
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw InputError("zones file is not a GeoJSON FeatureCollection");
  }
  std::vector<Zone> zones;
  std::size_t n = 0;
  for (const json& f : doc["features"]) {
    ++n;
    if (!f.is_object() || !f.contains("properties") || !f["properties"].is_object()) {
      throw InputError("feature #" + std::to_string(n) + " has no properties");
    }
    const json& props = f["properties"];
    Zone z;
    auto id = props.find("zone_id");
    if (id == props.end()) throw InputError("feature #" + std::to_string(n) + " has no zone_id");
    if (id->is_string()) {
      z.zone_id = id->get<std::string>();
    } else if (id->is_number_integer()) {
      z.zone_id = std::to_string(id->get<long long>());
    } else {
      throw InputError("feature #" + std::to_string(n) + ": zone_id must be a string or integer");
    }
    z.area_ha = number_prop(props, "area_ha", z.zone_id, std::nullopt);
    z.built_residential_m2 = number_prop(props, "built_residential_m2", z.zone_id, std::nullopt);
    z.built_total_m2 = number_prop(props, "built_total_m2", z.zone_id, std::nullopt);
    for (LandUseCategory c : kAllCategories) {
      z.landuse_m2[index_of(c)] =
          number_prop(props, "lu_" + std::string(category_key(c)) + "_m2", z.zone_id, 0.0);
    }

    if (!f.contains("geometry") || !f["geometry"].is_object()) {
      throw InputError("zone '" + z.zone_id + "': missing geometry");
    }
    const json& g = f["geometry"];
    const std::string type = g.value("type", "");
    if (!g.contains("coordinates")) throw InputError("zone '" + z.zone_id + "': no coordinates");
    if (type == "Polygon") {
      z.parts.push_back(read_polygon(g["coordinates"], z.zone_id));
    } else if (type == "MultiPolygon") {
      for (const json& p : g["coordinates"]) z.parts.push_back(read_polygon(p, z.zone_id));
    } else {
      throw InputError("zone '" + z.zone_id + "': unsupported geometry type '" + type + "'");
    }
    validate_zone(z);
    zones.push_back(std::move(z));
  }
  return zones;
}

std::vector<Zone> read_zones_geojson_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read zones file: " + path);
  return read_zones_geojson(in);
}

void export_geojson(std::ostream& out, std::span<const Zone> zones,
                    const std::vector<std::pair<std::string, ZoneColumn>>& columns) {
  std::set<std::string, std::less<>> ids;
  for (const Zone& z : zones) ids.insert(z.zone_id);
  for (const auto& [name, col] : columns) {
    for (const auto& [id, value] : col) {
      if (!ids.contains(id)) {
        throw InputError("column '" + name + "' has a value for unknown zone '" + id + "'");
      }
    }
  }

  ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = ordered_json::array();
  for (const Zone& z : zones) {
    ordered_json props;
    props["zone_id"] = z.zone_id;
    props["area_ha"] = z.area_ha;
    props["built_residential_m2"] = z.built_residential_m2;
    props["built_total_m2"] = z.built_total_m2;
    for (LandUseCategory c : kAllCategories) {
      props["lu_" + std::string(category_key(c)) + "_m2"] = z.landuse(c);
    }
    for (const auto& [name, col] : columns) {
      auto it = col.find(z.zone_id);
      if (it == col.end() || !it->second || !std::isfinite(*it->second)) {
        props[name] = nullptr;
      } else {
        props[name] = round6(*it->second);
      }
    }
    ordered_json geom;
    if (z.parts.size() == 1) {
      geom["type"] = "Polygon";
      geom["coordinates"] = polygon_json(z.parts.front());
    } else {
      geom["type"] = "MultiPolygon";
      geom["coordinates"] = ordered_json::array();
      for (const Polygon& p : z.parts) geom["coordinates"].push_back(polygon_json(p));
    }
    ordered_json feature;
    feature["type"] = "Feature";
    feature["properties"] = std::move(props);
    feature["geometry"] = std::move(geom);
    doc["features"].push_back(std::move(feature));
  }
  out << doc.dump() << '\n';
}

}  // namespace pulse
