#pragma once

#include <absl/time/time.h>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pulse {

/// One geotagged post. The instant is absolute; `utc_offset_minutes` keeps
/// the offset the source wrote so the record can be serialized back as-is.
struct GeoEvent {
  std::string user_id;
  absl::Time instant;
  int utc_offset_minutes = 0;
  double lon = 0.0;
  double lat = 0.0;
  std::optional<std::string> lang;
  std::optional<std::string> device;
  std::optional<std::string> text;

  bool operator==(const GeoEvent&) const = default;
};

enum class EventFormat { Ndjson, Csv };

std::optional<EventFormat> event_format_from_name(std::string_view name);
/// ".ndjson"/".jsonl"/".json" or ".csv"; nullopt for anything else.
std::optional<EventFormat> event_format_from_path(const std::filesystem::path& path);

struct Rejection {
  std::size_t line = 0;  // 1-based line in the source file
  std::string reason;

  bool operator==(const Rejection&) const = default;
};

/// Mergeable tally of skipped rows.
struct RejectionReport {
  std::size_t accepted = 0;
  std::vector<Rejection> rejected;

  std::size_t rejected_count() const noexcept { return rejected.size(); }
  /// Appends `other`; keeps the rejection list sorted by line.
  void merge(const RejectionReport& other);
};

struct ParsedEvents {
  std::vector<GeoEvent> events;
  RejectionReport report;
};

/// Streams records out of `source`. Malformed rows are skipped and reported,
/// never fatal. For CSV the first line must be the header.
ParsedEvents parse_events(std::istream& source, EventFormat format);

/// Parses the buffer in `threads` line-aligned partitions and merges the
/// results. Output is identical to the single-threaded parse.
ParsedEvents parse_events_parallel(std::string_view content, EventFormat format,
                                   unsigned threads);

/// Reads a whole file; an unreadable path throws InputError.
ParsedEvents read_events_file(const std::filesystem::path& path, EventFormat format,
                              unsigned threads = 1);

/// Parses an RFC 3339 timestamp that carries an explicit offset ("Z" or
/// "+hh:mm"). Returns nullopt when the text is not acceptable.
struct ParsedTimestamp {
  absl::Time instant;
  int utc_offset_minutes = 0;
};
std::optional<ParsedTimestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(absl::Time instant, int utc_offset_minutes);

std::string to_ndjson(const GeoEvent& event);
void write_ndjson(std::ostream& out, std::span<const GeoEvent> events);
void write_rejections_csv(std::ostream& out, const RejectionReport& report);

/// The study city's timezone, loaded from the system tz database.
class TimeZone {
 public:
  /// Throws ConfigError for an unknown id.
  static TimeZone load(const std::string& id);

  const std::string& name() const noexcept { return name_; }
  const absl::TimeZone& zone() const noexcept { return zone_; }

 private:
  TimeZone(std::string name, absl::TimeZone zone) : name_(std::move(name)), zone_(zone) {}

  std::string name_;
  absl::TimeZone zone_;
};

/// Quarter-hour of the local day: bin k covers [15k, 15k+15) minutes.
class QuarterBin {
 public:
  static constexpr int kCount = 96;

  constexpr QuarterBin() = default;
  /// Throws std::out_of_range outside [0, 95].
  explicit QuarterBin(int index);

  static QuarterBin from_minute_of_day(int minute);

  constexpr int index() const noexcept { return index_; }
  constexpr int start_minute() const noexcept { return index_ * 15; }

  friend constexpr auto operator<=>(QuarterBin, QuarterBin) = default;

 private:
  int index_ = 0;
};

QuarterBin quarter_bin(absl::Time instant, const TimeZone& tz);

/// True for local Tuesday, Wednesday and Thursday.
bool is_typical_workday(absl::Time instant, const TimeZone& tz);

/// Stable filter keeping only typical-workday events.
std::vector<GeoEvent> filter_workdays(std::span<const GeoEvent> events, const TimeZone& tz);

}  // namespace pulse
