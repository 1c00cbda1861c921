#include "pulse/activity.hpp"

#include "pulse/csv.hpp"
#include "pulse/error.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <stdexcept>
#include <thread>

namespace pulse {

namespace {

// (zone, bin-or-slot, user) packed so that sorting groups by zone then bin.
constexpr int kUserBits = 32;
constexpr int kBinBits = 7;

std::uint64_t pack(std::uint32_t zone, int bin, UserId user) noexcept {
  return (std::uint64_t{zone} << (kUserBits + kBinBits)) |
         (std::uint64_t(static_cast<unsigned>(bin)) << kUserBits) | user;
}

std::uint32_t key_zone(std::uint64_t k) noexcept {
  return static_cast<std::uint32_t>(k >> (kUserBits + kBinBits));
}

std::size_t key_bin(std::uint64_t k) noexcept {
  return static_cast<std::size_t>((k >> kUserBits) & ((1u << kBinBits) - 1));
}

void sort_unique(std::vector<std::uint64_t>& keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
}

void check_zone(std::uint32_t zone, std::size_t zone_count) {
  if (zone >= zone_count) {
    throw std::out_of_range("event zone " + std::to_string(zone) + " outside zone table of " +
                            std::to_string(zone_count));
  }
}

constexpr std::array<std::string_view, 4> kSlotNames = {"morning", "afternoon", "evening", "night"};

int parse_clock(std::string_view s) {
  // HH:MM, minutes since midnight, 24:00 allowed
  if (s.size() != 5 || s[2] != ':') return -1;
  int h = 0, m = 0;
  if (std::from_chars(s.data(), s.data() + 2, h).ec != std::errc() ||
      std::from_chars(s.data() + 3, s.data() + 5, m).ec != std::errc()) {
    return -1;
  }
  if (m < 0 || m > 59 || h < 0 || h > 24 || (h == 24 && m != 0)) return -1;
  return h * 60 + m;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

UserId UserRegistry::intern(std::string_view token) {
  auto [it, inserted] = ids_.try_emplace(std::string(token), static_cast<UserId>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

void UniqueUserCounter::add(const BinnedEvent& e) { keys_.push_back(pack(e.zone, e.bin.index(), e.user)); }

void UniqueUserCounter::merge(UniqueUserCounter&& other) {
  keys_.insert(keys_.end(), other.keys_.begin(), other.keys_.end());
  other.keys_.clear();
}

ActivityMatrix UniqueUserCounter::finish(std::vector<std::string> zone_ids) && {
  sort_unique(keys_);
  ActivityMatrix m;
  m.counts.assign(zone_ids.size(), {});
  m.zone_ids = std::move(zone_ids);
  for (std::uint64_t k : keys_) {
    check_zone(key_zone(k), m.counts.size());
    ++m.counts[key_zone(k)][key_bin(k)];
  }
  keys_.clear();
  return m;
}

ActivityMatrix count_unique_users(std::span<const BinnedEvent> events,
                                  std::vector<std::string> zone_ids) {
  UniqueUserCounter counter;
  for (const BinnedEvent& e : events) counter.add(e);
  return std::move(counter).finish(std::move(zone_ids));
}

ActivityMatrix count_unique_users_parallel(std::span<const BinnedEvent> events,
                                           std::vector<std::string> zone_ids, unsigned threads) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(events.size() / 4096 + 1)));
  if (threads == 1) return count_unique_users(events, std::move(zone_ids));
  std::vector<UniqueUserCounter> parts(threads);
  const std::size_t chunk = (events.size() + threads - 1) / threads;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        const std::size_t a = std::min(events.size(), t * chunk);
        const std::size_t b = std::min(events.size(), a + chunk);
        for (std::size_t i = a; i < b; ++i) parts[t].add(events[i]);
      });
    }
  }
  for (unsigned t = 1; t < threads; ++t) parts[0].merge(std::move(parts[t]));
  return std::move(parts[0]).finish(std::move(zone_ids));
}

// ---- slots -------------------------------------------------------------------

std::string_view slot_name(MajorSlot slot) noexcept { return kSlotNames[static_cast<std::size_t>(slot)]; }

BinRange parse_time_range(std::string_view text) {
  const std::string t = trim(text);
  const auto dash = t.find('-');
  if (dash == std::string::npos) throw ConfigError("time range '" + t + "' is not HH:MM-HH:MM");
  const int start = parse_clock(trim(std::string_view(t).substr(0, dash)));
  const int end = parse_clock(trim(std::string_view(t).substr(dash + 1)));
  if (start < 0 || end < 0) throw ConfigError("time range '" + t + "' is not HH:MM-HH:MM");
  if (start % 15 != 0 || end % 15 != 0) {
    throw ConfigError("time range '" + t + "' must start and end on a quarter hour");
  }
  if (end <= start) throw ConfigError("time range '" + t + "' is empty");
  return {start / 15, end / 15 - 1};
}

std::string format_time_range(const BinRange& r) {
  auto clock = [](int minutes) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
    return std::string(buf);
  };
  return clock(r.first * 15) + "-" + clock((r.last + 1) * 15);
}

SlotConfig::SlotConfig() : ranges_{{{32, 55}, {56, 75}, {76, 87}, {88, 95}}} {}

SlotConfig::SlotConfig(const std::array<BinRange, 4>& ranges) : ranges_(ranges) {
  for (std::size_t i = 0; i < 4; ++i) {
    const BinRange& r = ranges_[i];
    if (r.first < 0 || r.last >= kBinsPerDay || r.first > r.last) {
      throw ConfigError(std::string(kSlotNames[i]) + " slot range is invalid");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const BinRange& o = ranges_[j];
      if (r.first <= o.last && o.first <= r.last) {
        throw ConfigError(std::string(kSlotNames[j]) + " and " + std::string(kSlotNames[i]) +
                          " slots overlap");
      }
    }
  }
}

std::optional<MajorSlot> SlotConfig::slot_of(QuarterBin b) const noexcept {
  for (MajorSlot s : kMajorSlots) {
    if (range(s).contains(b)) return s;
  }
  return std::nullopt;
}

SlotCounts aggregate_major_slots(std::span<const BinnedEvent> events,
                                 std::vector<std::string> zone_ids, const SlotConfig& slots) {
  std::array<int, kBinsPerDay> slot_of_bin;
  for (int b = 0; b < kBinsPerDay; ++b) {
    auto s = slots.slot_of(QuarterBin(b));
    slot_of_bin[static_cast<std::size_t>(b)] = s ? static_cast<int>(*s) : -1;
  }
  std::vector<std::uint64_t> keys;
  keys.reserve(events.size());
  for (const BinnedEvent& e : events) {
    const int s = slot_of_bin[static_cast<std::size_t>(e.bin.index())];
    if (s >= 0) keys.push_back(pack(e.zone, s, e.user));
  }
  sort_unique(keys);
  SlotCounts out;
  out.counts.assign(zone_ids.size(), {});
  out.zone_ids = std::move(zone_ids);
  for (std::uint64_t k : keys) {
    check_zone(key_zone(k), out.counts.size());
    ++out.counts[key_zone(k)][key_bin(k)];
  }
  return out;
}

// ---- normalization -----------------------------------------------------------

NormalizedMatrix normalize_columns(const Eigen::MatrixXd& counts, std::vector<std::string> zone_ids,
                                   std::vector<std::string> bin_labels, double total) {
  NormalizedMatrix out;
  out.values = Eigen::MatrixXd::Zero(counts.rows(), counts.cols());
  out.slot_total = total;
  for (Eigen::Index c = 0; c < counts.cols(); ++c) {
    const double column_total = counts.col(c).sum();
    if (column_total > 0.0) {
      out.values.col(c) = counts.col(c) / column_total * total;
    } else {
      out.zero_columns.push_back(static_cast<std::size_t>(c));
    }
  }
  out.zone_ids = std::move(zone_ids);
  out.bin_labels = std::move(bin_labels);
  return out;
}

NormalizedMatrix normalize_counts(const ActivityMatrix& matrix, double total) {
  Eigen::MatrixXd counts(static_cast<Eigen::Index>(matrix.counts.size()), kBinsPerDay);
  for (std::size_t z = 0; z < matrix.counts.size(); ++z) {
    for (int b = 0; b < kBinsPerDay; ++b) {
      counts(static_cast<Eigen::Index>(z), b) = matrix.counts[z][static_cast<std::size_t>(b)];
    }
  }
  std::vector<std::string> labels;
  for (int b = 0; b < kBinsPerDay; ++b) labels.push_back("bin_" + std::to_string(b));
  return normalize_columns(counts, matrix.zone_ids, std::move(labels), total);
}

NormalizedMatrix normalize_counts(const SlotCounts& slot_counts, double total) {
  Eigen::MatrixXd counts(static_cast<Eigen::Index>(slot_counts.counts.size()), 4);
  for (std::size_t z = 0; z < slot_counts.counts.size(); ++z) {
    for (std::size_t s = 0; s < 4; ++s) {
      counts(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(s)) = slot_counts.counts[z][s];
    }
  }
  std::vector<std::string> labels;
  for (MajorSlot s : kMajorSlots) labels.emplace_back(slot_name(s));
  return normalize_columns(counts, slot_counts.zone_ids, std::move(labels), total);
}

void write_activity_matrix_csv(std::ostream& out, const ActivityMatrix& m) {
  out << "zone_id";
  for (int b = 0; b < kBinsPerDay; ++b) out << ",bin_" << b;
  out << '\n';
  for (std::size_t z = 0; z < m.counts.size(); ++z) {
    out << csv::escape(m.zone_ids[z]);
    for (std::uint32_t v : m.counts[z]) out << ',' << v;
    out << '\n';
  }
}

void write_normalized_csv(std::ostream& out, const NormalizedMatrix& m) {
  out << "zone_id";
  for (const std::string& l : m.bin_labels) out << ',' << csv::escape(l);
  out << '\n';
  for (Eigen::Index z = 0; z < m.values.rows(); ++z) {
    out << csv::escape(m.zone_ids[static_cast<std::size_t>(z)]);
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) out << ',' << csv::fmt(m.values(z, c));
    out << '\n';
  }
}

// ---- profiles ----------------------------------------------------------------

namespace {

// Labels each zone belongs to, in output order: its main class, "Activity"
// for activity zones, then its subcategory label.
std::vector<std::string> group_labels(const LandUseClass& cls) {
  if (cls.kind() != LandUseClass::Kind::Activity) return {cls.label()};
  return {"Activity", cls.label()};
}

int group_rank(const std::string& label) {
  if (label == "Residential") return 0;
  if (label == "Mixed") return 1;
  if (label == "Activity") return 2;
  auto cls = LandUseClass::from_label(label);
  return 3 + static_cast<int>(index_of(*cls->subcategory()));
}

// label -> member zone rows, ordered by group_rank
std::vector<std::pair<std::string, std::vector<Eigen::Index>>> class_groups(
    std::span<const std::optional<LandUseClass>> classes) {
  std::map<std::string, std::vector<Eigen::Index>> groups;
  for (std::size_t z = 0; z < classes.size(); ++z) {
    if (!classes[z]) continue;
    for (const std::string& l : group_labels(*classes[z])) groups[l].push_back(static_cast<Eigen::Index>(z));
  }
  std::vector<std::pair<std::string, std::vector<Eigen::Index>>> out(groups.begin(), groups.end());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return group_rank(a.first) < group_rank(b.first); });
  return out;
}

void check_rows(const NormalizedMatrix& m, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(m.values.rows()) != n) {
    throw std::invalid_argument(std::string(what) + ": zone count mismatch");
  }
}

}  // namespace

const TemporalProfile* ProfileSet::find(std::string_view label) const {
  for (const TemporalProfile& p : profiles) {
    if (p.label == label) return &p;
  }
  return nullptr;
}

ProfileSet landuse_profiles(const NormalizedMatrix& quarter,
                            std::span<const std::optional<LandUseClass>> classes) {
  check_rows(quarter, classes.size(), "landuse_profiles");
  if (quarter.values.cols() != kBinsPerDay) {
    throw std::invalid_argument("landuse_profiles needs a quarter-hour matrix");
  }
  ProfileSet set;
  for (const auto& [label, rows] : class_groups(classes)) {
    TemporalProfile p{label, {}, {}};
    double daily = 0.0;
    for (int b = 0; b < kBinsPerDay; ++b) {
      double t = 0.0;
      for (Eigen::Index r : rows) t += quarter.values(r, b);
      p.bin_totals[static_cast<std::size_t>(b)] = t;
      daily += t;
    }
    if (!(daily > 0.0)) {
      set.omitted.push_back(label);
      continue;
    }
    for (std::size_t b = 0; b < p.shares.size(); ++b) p.shares[b] = p.bin_totals[b] / daily;
    set.profiles.push_back(std::move(p));
  }
  return set;
}

void write_profiles_csv(std::ostream& out, const ProfileSet& profiles) {
  out << "class,bin,share\n";
  for (const TemporalProfile& p : profiles.profiles) {
    for (int b = 0; b < kBinsPerDay; ++b) {
      out << csv::escape(p.label) << ',' << b << ',' << csv::fmt(p.shares[static_cast<std::size_t>(b)])
          << '\n';
    }
  }
}

std::optional<double> density_per_hectare(double users, double area_ha) noexcept {
  if (!(area_ha > 0.0)) return std::nullopt;
  return users / area_ha;
}

std::vector<ClassSlotSummary> summarize_classes(const NormalizedMatrix& slots,
                                                const NormalizedMatrix& quarter,
                                                std::span<const std::optional<LandUseClass>> classes,
                                                std::span<const double> area_ha) {
  check_rows(slots, classes.size(), "summarize_classes");
  check_rows(quarter, classes.size(), "summarize_classes");
  if (area_ha.size() != classes.size()) throw std::invalid_argument("summarize_classes: area size");
  if (slots.values.cols() != 4) throw std::invalid_argument("summarize_classes needs 4 slot columns");

  std::vector<bool> active(static_cast<std::size_t>(quarter.values.cols()), false);
  std::size_t active_bins = 0;
  for (Eigen::Index b = 0; b < quarter.values.cols(); ++b) {
    if (quarter.values.col(b).sum() > 0.0) {
      active[static_cast<std::size_t>(b)] = true;
      ++active_bins;
    }
  }

  auto summarize = [&](std::string label, const std::vector<Eigen::Index>& rows) {
    ClassSlotSummary s;
    s.label = std::move(label);
    for (Eigen::Index r : rows) {
      for (Eigen::Index c = 0; c < 4; ++c) s.slots[static_cast<std::size_t>(c)] += slots.values(r, c);
      s.area_ha += area_ha[static_cast<std::size_t>(r)];
    }
    double sum = 0.0;
    for (Eigen::Index b = 0; b < quarter.values.cols(); ++b) {
      if (!active[static_cast<std::size_t>(b)]) continue;
      for (Eigen::Index r : rows) sum += quarter.values(r, b);
    }
    s.total_day = active_bins ? sum / double(active_bins) : 0.0;
    s.users_per_ha = density_per_hectare(s.total_day, s.area_ha);
    return s;
  };

  std::vector<ClassSlotSummary> out;
  for (const auto& [label, rows] : class_groups(classes)) out.push_back(summarize(label, rows));
  std::vector<Eigen::Index> all(classes.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
  out.push_back(summarize("Total", all));
  return out;
}

void write_class_slots_csv(std::ostream& out, std::span<const ClassSlotSummary> rows) {
  out << "class,morning,afternoon,evening,night,total_day,area_ha,users_per_ha\n";
  for (const ClassSlotSummary& r : rows) {
    csv::write_row(out, {r.label, csv::fmt(r.slots[0]), csv::fmt(r.slots[1]), csv::fmt(r.slots[2]),
                         csv::fmt(r.slots[3]), csv::fmt(r.total_day), csv::fmt(r.area_ha),
                         r.users_per_ha ? csv::fmt(*r.users_per_ha) : std::string()});
  }
}

}  // namespace pulse
