#include "oracles.hpp"

#include "pulse/error.hpp"
#include "pulse/spatial.hpp"

#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace pulse;

namespace {

Zone box(std::string id, double x0, double y0, double x1, double y1) {
  Zone z;
  z.zone_id = std::move(id);
  z.parts.push_back(Polygon{{Ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}}});
  z.area_ha = 1.0;
  return z;
}

// n x n grid of unit cells with jittered interior vertices, so edges are
// not axis-aligned.
std::vector<Zone> jittered_grid(int n, std::uint64_t seed) {
  boost::random::mt19937_64 rng(seed);
  boost::random::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::vector<std::vector<LonLat>> v(n + 1, std::vector<LonLat>(n + 1));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const bool inner = i > 0 && i < n && j > 0 && j < n;
      v[i][j] = {i + (inner ? jitter(rng) : 0.0), j + (inner ? jitter(rng) : 0.0)};
    }
  }
  std::vector<Zone> zones;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Zone z;
      char id[16];
      std::snprintf(id, sizeof id, "G%02d%02d", i, j);
      z.zone_id = id;
      z.parts.push_back(Polygon{{Ring{v[i][j], v[i + 1][j], v[i + 1][j + 1], v[i][j + 1], v[i][j]}}});
      z.area_ha = 1.0;
      zones.push_back(z);
    }
  }
  return zones;
}

}  // namespace

TEST_CASE("single unit square") {
  ZoneIndex idx({box("A", 0, 0, 1, 1)});
  CHECK(idx.locate_id({0.5, 0.5}) == std::optional<std::string>("A"));
  CHECK_FALSE(idx.locate({2.0, 2.0}));
  // left and bottom edges are in, right and top are out
  CHECK(idx.locate({0.0, 0.5}));
  CHECK(idx.locate({0.5, 0.0}));
  CHECK_FALSE(idx.locate({1.0, 0.5}));
  CHECK_FALSE(idx.locate({0.5, 1.0}));
}

TEST_CASE("shared edge goes to exactly one zone, the same one every time") {
  ZoneIndex idx({box("L", 0, 0, 1, 1), box("R", 1, 0, 2, 1), box("T", 0, 1, 1, 2)});
  for (int rep = 0; rep < 3; ++rep) {
    CHECK(idx.locate_id({1.0, 0.5}) == std::optional<std::string>("R"));
    CHECK(idx.locate_id({0.5, 1.0}) == std::optional<std::string>("T"));
    CHECK(idx.locate_id({1.0, 1.0}) == std::nullopt);  // corner of L, R, T with no fourth zone
  }
  CHECK(idx.overlap_warnings() == 0);
}

TEST_CASE("overlapping zones resolve to the smallest id and are counted") {
  ZoneIndex idx({box("b", 0, 0, 2, 2), box("a", 1, 1, 3, 3)});
  CHECK(idx.locate_id({1.5, 1.5}) == std::optional<std::string>("a"));
  CHECK(idx.overlap_warnings() == 1);
  CHECK(idx.locate_id({0.5, 0.5}) == std::optional<std::string>("b"));
  CHECK(idx.overlap_warnings() == 1);
}

TEST_CASE("holes and multipolygons") {
  Zone z = box("H", 0, 0, 4, 4);
  z.parts[0].rings.push_back(Ring{{1, 1}, {3, 1}, {3, 3}, {1, 3}, {1, 1}});
  z.parts.push_back(Polygon{{Ring{{10, 10}, {11, 10}, {11, 11}, {10, 11}, {10, 10}}}});
  ZoneIndex idx({z});
  CHECK(idx.locate({0.5, 0.5}));
  CHECK_FALSE(idx.locate({2, 2}));
  CHECK(idx.locate({10.5, 10.5}));
  const LonLat c = centroid(box("S", 0, 0, 2, 2));
  CHECK(c.lon == doctest::Approx(1.0));
  CHECK(c.lat == doctest::Approx(1.0));
  Zone lshape = box("C", 0, 0, 4, 2);
  lshape.parts[0].rings.push_back(Ring{{2, 0.5}, {3, 0.5}, {3, 1.5}, {2, 1.5}, {2, 0.5}});
  // 8 - 1 of area; hole centred at (2.5, 1) pulls the centroid left
  CHECK(centroid(lshape).lon == doctest::Approx((8 * 2.0 - 1 * 2.5) / 7));
  CHECK(centroid(lshape).lat == doctest::Approx(1.0));
}

TEST_CASE("index agrees with brute force on a jittered tessellation") {
  const auto zones = jittered_grid(7, 11);  // 49 zones
  ZoneIndex idx(zones);
  boost::random::mt19937_64 rng(3);
  boost::random::uniform_real_distribution<double> u(-0.5, 7.5);
  std::size_t assigned = 0, unassigned = 0;
  for (int i = 0; i < 1000; ++i) {
    const LonLat p{u(rng), u(rng)};
    const auto got = idx.locate(p);
    CHECK(got == idx.locate_brute_force(p));
    CHECK(got == oracle::locate(idx.zones(), p));
    got ? ++assigned : ++unassigned;
  }
  CHECK(assigned + unassigned == 1000);
  CHECK(idx.overlap_warnings() == 0);
}

TEST_CASE("zone validation names the zone") {
  Zone open = box("OPEN", 0, 0, 1, 1);
  open.parts[0].rings[0].pop_back();
  CHECK_THROWS_WITH_AS(validate_zone(open), doctest::Contains("OPEN"), InputError);

  Zone flat;
  flat.zone_id = "FLAT";
  flat.area_ha = 1;
  flat.parts.push_back(Polygon{{Ring{{0, 0}, {1, 0}, {0, 0}, {1, 0}, {0, 0}}}});
  CHECK_THROWS_WITH_AS(validate_zone(flat), doctest::Contains("FLAT"), InputError);

  Zone bow;
  bow.zone_id = "BOW";
  bow.area_ha = 1;
  bow.parts.push_back(Polygon{{Ring{{0, 0}, {1, 1}, {1, 0}, {0, 1}, {0, 0}}}});
  CHECK_THROWS_WITH_AS(validate_zone(bow), doctest::Contains("BOW"), InputError);

  Zone res = box("RES", 0, 0, 1, 1);
  res.built_residential_m2 = 10;
  res.built_total_m2 = 5;
  CHECK_THROWS_AS(validate_zone(res), InputError);

  Zone neg = box("NEG", 0, 0, 1, 1);
  neg.landuse_m2[2] = -1;
  CHECK_THROWS_AS(validate_zone(neg), InputError);

  Zone area = box("AREA", 0, 0, 1, 1);
  area.area_ha = 0;
  CHECK_THROWS_AS(validate_zone(area), InputError);

  CHECK_THROWS_AS(ZoneIndex({box("D", 0, 0, 1, 1), box("D", 2, 2, 3, 3)}), InputError);
  CHECK_THROWS_AS(ZoneIndex(std::vector<Zone>{}), InputError);
}

TEST_CASE("haversine distances") {
  const CityCentre centre{-3.0, 40.0};
  CHECK(distance_to_centre(box("C", -3.5, 39.5, -2.5, 40.5), centre) == doctest::Approx(0.0));
  // 0.01 degrees of latitude: R * 0.01 * pi / 180
  const double expected = 6371008.8 * 0.01 * std::numbers::pi / 180.0;
  CHECK(expected == doctest::Approx(1111.95).epsilon(1e-5));
  CHECK(haversine_m({-3.0, 40.0}, {-3.0, 40.01}) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(std::abs(haversine_m({-3.0, 40.0}, {-3.0, 40.01}) - 1112.0) < 1.0);

  const LonLat a{-3.7, 40.4}, b{-3.65, 40.45};
  CHECK(haversine_m(a, b) == doctest::Approx(haversine_m(b, a)));
  CHECK(haversine_m(a, a) == 0.0);
  CHECK(haversine_m(a, b) > 0.0);

  const double near = distance_to_centre(box("N", -3.01, 39.99, -2.99, 40.01 + 0.02), centre);
  const double far = distance_to_centre(box("F", -2.91, 39.99, -2.89, 40.01 + 0.02), centre);
  CHECK(near < far);
}

TEST_CASE("geojson read, export and re-read") {
  const std::string text = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"zone_id":"Z2","area_ha":12.5,"built_residential_m2":700,"built_total_m2":1000,
      "lu_residential_m2":700,"lu_retail_m2":300},
     "geometry":{"type":"Polygon","coordinates":[[[1,0],[2,0],[2,1],[1,1],[1,0]]]}},
    {"type":"Feature","properties":{"zone_id":1,"area_ha":3,"built_residential_m2":0,"built_total_m2":10,
      "lu_office_m2":10},
     "geometry":{"type":"MultiPolygon","coordinates":[[[[0,0],[1,0],[1,1],[0,1],[0,0]]],[[[5,5],[6,5],[6,6],[5,6],[5,5]]]]}}
  ]})";
  std::istringstream in(text);
  const auto zones = read_zones_geojson(in);
  REQUIRE(zones.size() == 2);
  CHECK(zones[0].zone_id == "Z2");
  CHECK(zones[0].landuse(LandUseCategory::Retail) == 300);
  CHECK(zones[0].landuse(LandUseCategory::Office) == 0);
  CHECK(zones[1].zone_id == "1");
  CHECK(zones[1].parts.size() == 2);

  std::ostringstream out;
  export_geojson(out, zones, {{"night", ZoneColumn{{"Z2", 1234.5678901}}}});
  const auto doc = nlohmann::json::parse(out.str());
  REQUIRE(doc["features"].size() == 2);
  CHECK(doc["features"][0]["properties"]["night"].get<double>() == doctest::Approx(1234.57));
  CHECK(doc["features"][1]["properties"]["night"].is_null());

  std::istringstream again(out.str());
  const auto back = read_zones_geojson(again);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].parts == zones[i].parts);
    CHECK(back[i].landuse_m2 == zones[i].landuse_m2);
    CHECK(back[i].area_ha == zones[i].area_ha);
  }

  std::ostringstream sink;
  CHECK_THROWS_AS(export_geojson(sink, zones, {{"x", ZoneColumn{{"nope", 1.0}}}}), InputError);
}

TEST_CASE("geojson with missing properties is rejected") {
  std::istringstream in(R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"zone_id":"A"},
     "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}]})");
  CHECK_THROWS_AS(read_zones_geojson(in), InputError);
  CHECK_THROWS_AS(read_zones_geojson_file("/nonexistent/zones.geojson"), InputError);
}
