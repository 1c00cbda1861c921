#include "pulse/error.hpp"
#include "pulse/landuse.hpp"

#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <sstream>

using namespace pulse;

namespace {

Zone zone_with(std::string id, double residential, CategoryAreas other = {}) {
  Zone z;
  z.zone_id = std::move(id);
  z.parts.push_back(Polygon{{Ring{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}}});
  z.area_ha = 1;
  z.landuse_m2 = other;
  z.landuse_m2[index_of(LandUseCategory::Residential)] = residential;
  z.built_residential_m2 = residential;
  double total = 0;
  for (double v : z.landuse_m2) total += v;
  z.built_total_m2 = total;
  return z;
}

Zone with_fraction(double f) {
  CategoryAreas a{};
  a[index_of(LandUseCategory::Retail)] = 1000 * (1 - f);
  return zone_with("Z", 1000 * f, a);
}

}  // namespace

TEST_CASE("predominance thresholds") {
  CHECK(classify_zone(with_fraction(0.70)) == LandUseClass::residential());
  CHECK(classify_zone(with_fraction(0.50)) == LandUseClass::mixed());
  CHECK(classify_zone(with_fraction(0.40)) == LandUseClass::mixed());
  CHECK(classify_zone(with_fraction(0.30)) == LandUseClass::activity(LandUseCategory::Retail));
  // exactly at the threshold is not "more than"
  Zone edge = zone_with("E", 666, {});
  edge.built_total_m2 = 1000;
  CHECK(classify_zone(edge) == LandUseClass::mixed());
  CHECK(classify_zone(edge, PredominanceRule{0.6}) == LandUseClass::residential());
}

TEST_CASE("activity subcategory is the non-residential argmax") {
  CategoryAreas a{};
  a[index_of(LandUseCategory::Office)] = 5000;
  a[index_of(LandUseCategory::Retail)] = 2000;
  a[index_of(LandUseCategory::Health)] = 1000;
  const Zone z = zone_with("O", 0.1 * 8000 / 0.9, a);
  CHECK(residential_fraction(z) == doctest::Approx(0.1));
  CHECK(classify_zone(z) == LandUseClass::activity(LandUseCategory::Office));

  CategoryAreas tie{};
  tie[index_of(LandUseCategory::Transport)] = 300;
  tie[index_of(LandUseCategory::Education)] = 300;
  CHECK(classify_zone(zone_with("T", 0, tie)) == LandUseClass::activity(LandUseCategory::Education));
}

TEST_CASE("zero built surface is a classification error naming the zone") {
  Zone z = zone_with("EMPTY", 0);
  try {
    classify_zone(z);
    FAIL("expected ClassificationError");
  } catch (const ClassificationError& e) {
    CHECK(e.zone_id() == "EMPTY");
  }
  const auto rows = classify_zones(std::vector<Zone>{z, with_fraction(0.9)});
  CHECK_FALSE(rows[0].cls);
  CHECK(rows[1].cls == LandUseClass::residential());
  std::ostringstream out;
  write_classification_csv(out, rows);
  CHECK(out.str() == "zone_id,class,subcategory,residential_fraction\nEMPTY,Unclassified,,\nZ,Residential,,0.9\n");
}

TEST_CASE("classification is scale invariant") {
  boost::random::mt19937_64 rng(5);
  boost::random::uniform_real_distribution<double> u(0, 1000), scale(0.001, 1000);
  for (int i = 0; i < 500; ++i) {
    CategoryAreas a{};
    for (std::size_t c = 0; c < kActivityCategoryCount; ++c) a[c] = u(rng);
    const Zone z = zone_with("S", 3 * u(rng), a);
    const double f = residential_fraction(z);
    if (std::abs(f - 0.666) < 1e-9 || std::abs(f - 0.334) < 1e-9) continue;
    Zone scaled = z;
    const double c = scale(rng);
    for (double& v : scaled.landuse_m2) v *= c;
    scaled.built_residential_m2 *= c;
    scaled.built_total_m2 *= c;
    CHECK(classify_zone(scaled) == classify_zone(z));
  }
}

TEST_CASE("class labels round-trip") {
  CHECK(LandUseClass::activity(LandUseCategory::ParkSport).label() == "Activity:ParkSport");
  for (LandUseCategory c : kAllCategories) {
    if (c == LandUseCategory::Residential) continue;
    const LandUseClass cls = LandUseClass::activity(c);
    CHECK(LandUseClass::from_label(cls.label()) == cls);
  }
  CHECK(LandUseClass::from_label("Mixed") == LandUseClass::mixed());
  CHECK_FALSE(LandUseClass::from_label("Activity:Residential"));
  CHECK_FALSE(LandUseClass::from_label("Nope"));
  CHECK_THROWS_AS(LandUseClass::activity(LandUseCategory::Residential), std::invalid_argument);
  CHECK(category_from_name("park") == LandUseCategory::ParkSport);
}

TEST_CASE("land-use area table") {
  CategoryAreas retail{};
  retail[index_of(LandUseCategory::Retail)] = 100;
  Zone a = zone_with("b", 0, retail);
  Zone b = zone_with("a", 50, {});
  const AreaTable t = landuse_area_table(std::vector<Zone>{a, b});
  CHECK(t.zone_ids == std::vector<std::string>{"a", "b"});
  CHECK(t.m2.rows() == 2);
  CHECK(t.m2.cols() == 10);
  CHECK(t.m2(1, static_cast<Eigen::Index>(index_of(LandUseCategory::Retail))) == 100);
  CHECK(t.m2.row(1).sum() == 100);
  CHECK(t.m2(0, static_cast<Eigen::Index>(index_of(LandUseCategory::Residential))) == 50);

  boost::random::mt19937_64 rng(9);
  boost::random::uniform_real_distribution<double> u(0, 1e4);
  std::vector<Zone> zones;
  for (int i = 0; i < 30; ++i) {
    CategoryAreas x{};
    for (double& v : x) v = u(rng);
    zones.push_back(zone_with("z" + std::to_string(i), x[9], x));
  }
  const AreaTable big = landuse_area_table(zones);
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    double direct = 0;
    for (const Zone& z : zones) direct += z.landuse_m2[c];
    CHECK(big.m2.col(static_cast<Eigen::Index>(c)).sum() == doctest::Approx(direct).epsilon(1e-12));
  }
  for (Eigen::Index r = 0; r < big.m2.rows(); ++r) {
    const auto it = std::find_if(zones.begin(), zones.end(),
                                 [&](const Zone& z) { return z.zone_id == big.zone_ids[static_cast<std::size_t>(r)]; });
    double direct = 0;
    for (double v : it->landuse_m2) direct += v;
    CHECK(big.m2.row(r).sum() == doctest::Approx(direct).epsilon(1e-12));
  }
}
