#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace pulse {

// Closed set of land-use categories. The declaration order doubles as the
// tie-break order for the activity subcategory and as the column order of
// the area table.
enum class LandUseCategory {
  Office,
  Industry,
  Retail,
  Health,
  Education,
  Culture,
  Transport,
  ParkSport,
  Other,
  Residential,
};

inline constexpr std::size_t kCategoryCount = 10;
inline constexpr std::size_t kActivityCategoryCount = 9;

inline constexpr std::array<LandUseCategory, kCategoryCount> kAllCategories = {
    LandUseCategory::Office,    LandUseCategory::Industry,  LandUseCategory::Retail,
    LandUseCategory::Health,    LandUseCategory::Education, LandUseCategory::Culture,
    LandUseCategory::Transport, LandUseCategory::ParkSport, LandUseCategory::Other,
    LandUseCategory::Residential,
};

constexpr std::size_t index_of(LandUseCategory c) noexcept { return static_cast<std::size_t>(c); }

/// Display name, e.g. "Office", "ParkSport".
std::string_view category_name(LandUseCategory c) noexcept;
/// Key stem used in zone files: lu_<stem>_m2.
std::string_view category_key(LandUseCategory c) noexcept;
std::optional<LandUseCategory> category_from_name(std::string_view name) noexcept;

using CategoryAreas = std::array<double, kCategoryCount>;

}  // namespace pulse
