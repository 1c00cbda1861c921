#pragma once

#include "pulse/ingest.hpp"
#include "pulse/landuse.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pulse {

inline constexpr int kBinsPerDay = QuarterBin::kCount;
inline constexpr double kDefaultSlotTotal = 100000.0;

using UserId = std::uint32_t;

/// Interns opaque user tokens to dense ids (first seen, first numbered).
class UserRegistry {
 public:
  UserId intern(std::string_view token);
  const std::string& token(UserId id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }

 private:
  std::unordered_map<std::string, UserId> ids_;
  std::vector<std::string> tokens_;
};

/// An event after spatial join and binning. `zone` is the row of the zone in
/// sorted zone_id order.
struct BinnedEvent {
  UserId user = 0;
  std::uint32_t zone = 0;
  QuarterBin bin;
};

/// T_zh at quarter-hour resolution: unique active users per zone and bin.
struct ActivityMatrix {
  std::vector<std::string> zone_ids;
  std::vector<std::array<std::uint32_t, kBinsPerDay>> counts;

  std::uint32_t at(std::size_t zone, QuarterBin bin) const {
    return counts.at(zone)[static_cast<std::size_t>(bin.index())];
  }
};

/// Mergeable (zone, bin) -> user-set accumulator. Partitions can be filled
/// independently and merged in any order; the result does not depend on
/// how the events were split.
class UniqueUserCounter {
 public:
  void add(const BinnedEvent& e);
  void merge(UniqueUserCounter&& other);
  ActivityMatrix finish(std::vector<std::string> zone_ids) &&;

 private:
  std::vector<std::uint64_t> keys_;
};

ActivityMatrix count_unique_users(std::span<const BinnedEvent> events,
                                  std::vector<std::string> zone_ids);

/// Same result as count_unique_users, computed on up to `threads` workers.
ActivityMatrix count_unique_users_parallel(std::span<const BinnedEvent> events,
                                           std::vector<std::string> zone_ids, unsigned threads);

// ---- major slots ------------------------------------------------------------

enum class MajorSlot { Morning, Afternoon, Evening, Night };
inline constexpr std::array<MajorSlot, 4> kMajorSlots = {MajorSlot::Morning, MajorSlot::Afternoon,
                                                         MajorSlot::Evening, MajorSlot::Night};

/// "morning", "afternoon", "evening", "night".
std::string_view slot_name(MajorSlot slot) noexcept;

/// Inclusive quarter-bin range.
struct BinRange {
  int first = 0;
  int last = 0;

  bool contains(QuarterBin b) const noexcept { return b.index() >= first && b.index() <= last; }
  bool operator==(const BinRange&) const = default;
};

/// Parses a half-open local time range "HH:MM-HH:MM" (end may be 24:00)
/// whose bounds fall on quarter hours. Throws ConfigError.
BinRange parse_time_range(std::string_view text);
std::string format_time_range(const BinRange& r);

class SlotConfig {
 public:
  /// Morning 08:00-13:59, Afternoon 14:00-18:59, Evening 19:00-21:59,
  /// Night 22:00-23:59. 00:00-07:59 belongs to no slot.
  SlotConfig();
  /// Throws ConfigError when a range is empty, leaves 0..95 or overlaps another.
  explicit SlotConfig(const std::array<BinRange, 4>& ranges);

  const BinRange& range(MajorSlot s) const noexcept { return ranges_[static_cast<std::size_t>(s)]; }
  std::optional<MajorSlot> slot_of(QuarterBin b) const noexcept;

 private:
  std::array<BinRange, 4> ranges_;
};

/// Unique users per zone per major slot.
struct SlotCounts {
  std::vector<std::string> zone_ids;
  std::vector<std::array<std::uint32_t, 4>> counts;

  std::uint32_t at(std::size_t zone, MajorSlot s) const {
    return counts.at(zone)[static_cast<std::size_t>(s)];
  }
};

/// Re-deduplicates users at slot scope: a user seen in several bins of the
/// same slot and zone counts once. Bins outside every slot are ignored.
SlotCounts aggregate_major_slots(std::span<const BinnedEvent> events,
                                 std::vector<std::string> zone_ids, const SlotConfig& slots);

// ---- normalization -----------------------------------------------------------

/// T_zhn = T_zh / T_h * total, zones x bins.
struct NormalizedMatrix {
  std::vector<std::string> zone_ids;
  std::vector<std::string> bin_labels;
  Eigen::MatrixXd values;
  double slot_total = kDefaultSlotTotal;
  std::vector<std::size_t> zero_columns;  // bins with T_h = 0, left all-zero
};

NormalizedMatrix normalize_counts(const ActivityMatrix& matrix, double total = kDefaultSlotTotal);
NormalizedMatrix normalize_counts(const SlotCounts& counts, double total = kDefaultSlotTotal);
/// Column-wise normalization of an arbitrary zones x bins count matrix.
NormalizedMatrix normalize_columns(const Eigen::MatrixXd& counts, std::vector<std::string> zone_ids,
                                   std::vector<std::string> bin_labels,
                                   double total = kDefaultSlotTotal);

void write_activity_matrix_csv(std::ostream& out, const ActivityMatrix& m);
/// zone_id followed by one column per bin label.
void write_normalized_csv(std::ostream& out, const NormalizedMatrix& m);

// ---- land-use profiles -------------------------------------------------------

struct TemporalProfile {
  std::string label;                          // LandUseClass label or "Activity"
  std::array<double, kBinsPerDay> bin_totals;  // normalized users per bin
  std::array<double, kBinsPerDay> shares;      // bin_totals / daily sum
};

struct ProfileSet {
  std::vector<TemporalProfile> profiles;
  std::vector<std::string> omitted;  // classes present but with no users

  const TemporalProfile* find(std::string_view label) const;
};

/// Sums quarter-hour normalized values per predominant class. Emits
/// Residential, Mixed, Activity (all activity zones together) and one
/// profile per activity subcategory present. `classes` follows the matrix
/// row order; zones with no class are skipped.
ProfileSet landuse_profiles(const NormalizedMatrix& quarter,
                            std::span<const std::optional<LandUseClass>> classes);

void write_profiles_csv(std::ostream& out, const ProfileSet& profiles);

/// nullopt when the area is not positive.
std::optional<double> density_per_hectare(double users, double area_ha) noexcept;

/// One row of the class x slot table.
struct ClassSlotSummary {
  std::string label;
  std::array<double, 4> slots{};  // summed normalized slot values
  double total_day = 0.0;        // mean of the class's quarter-hour totals over active bins
  double area_ha = 0.0;
  std::optional<double> users_per_ha;
};

/// Rows: Residential, Mixed, Activity, each activity subcategory present,
/// then "Total" over every zone.
std::vector<ClassSlotSummary> summarize_classes(const NormalizedMatrix& slots,
                                                const NormalizedMatrix& quarter,
                                                std::span<const std::optional<LandUseClass>> classes,
                                                std::span<const double> area_ha);

void write_class_slots_csv(std::ostream& out, std::span<const ClassSlotSummary> rows);

}  // namespace pulse
