#include "pulse/ingest.hpp"

#include "pulse/csv.hpp"
#include "pulse/error.hpp"

#include <absl/time/civil_time.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pulse {

namespace {

using nlohmann::json;

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Shared validation for both formats. Returns the rejection reason or empty.
std::string validate(const GeoEvent& e) {
  if (e.user_id.empty()) return "user_id empty";
  if (!std::isfinite(e.lon) || e.lon < -180.0 || e.lon > 180.0) return "lon out of range";
  if (!std::isfinite(e.lat) || e.lat < -90.0 || e.lat > 90.0) return "lat out of range";
  return {};
}

struct CsvLayout {
  int user_id = -1, timestamp = -1, lon = -1, lat = -1;
  int lang = -1, device = -1, text = -1;
  std::size_t width = 0;
};

CsvLayout parse_csv_header(std::string_view line) {
  std::vector<std::string> cols;
  if (!csv::split_row(line, cols)) throw InputError("CSV header: unterminated quote");
  CsvLayout layout;
  layout.width = cols.size();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const int idx = static_cast<int>(i);
    const std::string name = lowercase(cols[i]);
    if (name == "user_id") layout.user_id = idx;
    else if (name == "timestamp") layout.timestamp = idx;
    else if (name == "lon") layout.lon = idx;
    else if (name == "lat") layout.lat = idx;
    else if (name == "lang") layout.lang = idx;
    else if (name == "device") layout.device = idx;
    else if (name == "text") layout.text = idx;
  }
  for (auto [col, name] : {std::pair{layout.user_id, "user_id"}, {layout.timestamp, "timestamp"},
                           {layout.lon, "lon"}, {layout.lat, "lat"}}) {
    if (col < 0) throw InputError(std::string("CSV header lacks required column '") + name + "'");
  }
  return layout;
}

std::string parse_csv_row(std::string_view line, const CsvLayout& layout, GeoEvent& out) {
  std::vector<std::string> f;
  if (!csv::split_row(line, f)) return "unterminated quote";
  if (f.size() != layout.width) {
    return "expected " + std::to_string(layout.width) + " fields, got " + std::to_string(f.size());
  }
  out.user_id = f[layout.user_id];
  auto ts = parse_timestamp(f[layout.timestamp]);
  if (!ts) return "bad timestamp";
  out.instant = ts->instant;
  out.utc_offset_minutes = ts->utc_offset_minutes;
  auto lon = parse_double(f[layout.lon]);
  if (!lon) return "lon not a number";
  auto lat = parse_double(f[layout.lat]);
  if (!lat) return "lat not a number";
  out.lon = *lon;
  out.lat = *lat;
  auto opt = [&](int col) -> std::optional<std::string> {
    if (col < 0 || f[col].empty()) return std::nullopt;
    return f[col];
  };
  out.lang = opt(layout.lang);
  out.device = opt(layout.device);
  out.text = opt(layout.text);
  return validate(out);
}

std::string parse_ndjson_row(std::string_view line, GeoEvent& out) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return "malformed JSON";
  auto u = j.find("u");
  if (u == j.end() || !u->is_string()) return "missing or non-string u";
  out.user_id = u->get<std::string>();
  auto t = j.find("t");
  if (t == j.end() || !t->is_string()) return "missing or non-string t";
  auto ts = parse_timestamp(t->get_ref<const std::string&>());
  if (!ts) return "bad timestamp";
  out.instant = ts->instant;
  out.utc_offset_minutes = ts->utc_offset_minutes;
  auto lon = j.find("lon");
  if (lon == j.end() || !lon->is_number()) return "lon not a number";
  auto lat = j.find("lat");
  if (lat == j.end() || !lat->is_number()) return "lat not a number";
  out.lon = lon->get<double>();
  out.lat = lat->get<double>();
  auto opt = [&](const char* key, std::optional<std::string>& dst) -> bool {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      dst.reset();
      return true;
    }
    if (!it->is_string()) return false;
    dst = it->get<std::string>();
    return true;
  };
  if (!opt("lang", out.lang)) return "lang not a string";
  if (!opt("device", out.device)) return "device not a string";
  if (!opt("text", out.text)) return "text not a string";
  return validate(out);
}

struct LineRef {
  std::string_view text;
  std::size_t number;
};

std::vector<LineRef> split_lines(std::string_view content) {
  std::vector<LineRef> lines;
  std::size_t pos = 0, number = 1;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({line, number++});
    pos = end + 1;
  }
  return lines;
}

ParsedEvents parse_range(std::span<const LineRef> lines, EventFormat format,
                         const CsvLayout* layout) {
  ParsedEvents out;
  out.events.reserve(lines.size());
  for (const LineRef& line : lines) {
    if (is_blank(line.text)) continue;
    GeoEvent e;
    std::string reason = format == EventFormat::Csv ? parse_csv_row(line.text, *layout, e)
                                                    : parse_ndjson_row(line.text, e);
    if (reason.empty()) {
      out.events.push_back(std::move(e));
      ++out.report.accepted;
    } else {
      out.report.rejected.push_back({line.number, std::move(reason)});
    }
  }
  return out;
}

}  // namespace

std::optional<EventFormat> event_format_from_name(std::string_view name) {
  const std::string n = lowercase(name);
  if (n == "ndjson" || n == "jsonl") return EventFormat::Ndjson;
  if (n == "csv") return EventFormat::Csv;
  return std::nullopt;
}

std::optional<EventFormat> event_format_from_path(const std::filesystem::path& path) {
  const std::string ext = lowercase(path.extension().string());
  if (ext == ".ndjson" || ext == ".jsonl" || ext == ".json") return EventFormat::Ndjson;
  if (ext == ".csv") return EventFormat::Csv;
  return std::nullopt;
}

void RejectionReport::merge(const RejectionReport& other) {
  accepted += other.accepted;
  const auto mid = rejected.size();
  rejected.insert(rejected.end(), other.rejected.begin(), other.rejected.end());
  std::inplace_merge(rejected.begin(), rejected.begin() + static_cast<std::ptrdiff_t>(mid),
                     rejected.end(),
                     [](const Rejection& a, const Rejection& b) { return a.line < b.line; });
}

std::optional<ParsedTimestamp> parse_timestamp(std::string_view text) {
  if (text.size() < 20) return std::nullopt;
  int offset = 0;
  const char last = text.back();
  if (last == 'Z' || last == 'z') {
    offset = 0;
  } else {
    std::string_view tail = text.substr(text.size() - 6);
    if ((tail[0] != '+' && tail[0] != '-') || tail[3] != ':') return std::nullopt;
    int hh = 0, mm = 0;
    if (std::from_chars(tail.data() + 1, tail.data() + 3, hh).ec != std::errc() ||
        std::from_chars(tail.data() + 4, tail.data() + 6, mm).ec != std::errc()) {
      return std::nullopt;
    }
    offset = (hh * 60 + mm) * (tail[0] == '-' ? -1 : 1);
  }
  absl::Time t;
  std::string err;
  if (!absl::ParseTime(absl::RFC3339_full, std::string(text), &t, &err)) return std::nullopt;
  return ParsedTimestamp{t, offset};
}

std::string format_timestamp(absl::Time instant, int utc_offset_minutes) {
  return absl::FormatTime(absl::RFC3339_full, instant,
                          absl::FixedTimeZone(utc_offset_minutes * 60));
}

ParsedEvents parse_events(std::istream& source, EventFormat format) {
  if (!source) throw InputError("event source is not readable");
  std::string content{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
  if (source.bad()) throw InputError("I/O error while reading event source");
  return parse_events_parallel(content, format, 1);
}

ParsedEvents parse_events_parallel(std::string_view content, EventFormat format,
                                   unsigned threads) {
  std::vector<LineRef> lines = split_lines(content);
  std::span<const LineRef> body(lines);
  CsvLayout layout;
  if (format == EventFormat::Csv) {
    if (lines.empty()) throw InputError("CSV source has no header");
    layout = parse_csv_header(lines.front().text);
    body = body.subspan(1);
  }

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(body.size() / 1024 + 1)));
  std::vector<ParsedEvents> parts(threads);
  const std::size_t chunk = (body.size() + threads - 1) / threads;
  auto work = [&](unsigned i) {
    const std::size_t a = std::min(body.size(), i * chunk);
    const std::size_t b = std::min(body.size(), a + chunk);
    parts[i] = parse_range(body.subspan(a, b - a), format, &layout);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work, i);
  }

  ParsedEvents out = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    out.events.insert(out.events.end(), std::make_move_iterator(parts[i].events.begin()),
                      std::make_move_iterator(parts[i].events.end()));
    out.report.merge(parts[i].report);
  }
  return out;
}

ParsedEvents read_events_file(const std::filesystem::path& path, EventFormat format,
                              unsigned threads) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read events file: " + path.string());
  std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw InputError("I/O error reading events file: " + path.string());
  return parse_events_parallel(content, format, threads);
}

std::string to_ndjson(const GeoEvent& e) {
  nlohmann::ordered_json j;
  j["u"] = e.user_id;
  j["t"] = format_timestamp(e.instant, e.utc_offset_minutes);
  j["lon"] = e.lon;
  j["lat"] = e.lat;
  if (e.lang) j["lang"] = *e.lang;
  if (e.device) j["device"] = *e.device;
  if (e.text) j["text"] = *e.text;
  return j.dump();
}

void write_ndjson(std::ostream& out, std::span<const GeoEvent> events) {
  for (const GeoEvent& e : events) out << to_ndjson(e) << '\n';
}

void write_rejections_csv(std::ostream& out, const RejectionReport& report) {
  out << "line,reason\n";
  for (const Rejection& r : report.rejected) {
    csv::write_row(out, {std::to_string(r.line), r.reason});
  }
}

TimeZone TimeZone::load(const std::string& id) {
  absl::TimeZone zone;
  if (id.empty() || !absl::LoadTimeZone(id, &zone)) {
    throw ConfigError("unknown timezone id '" + id + "'");
  }
  return TimeZone(id, zone);
}

QuarterBin::QuarterBin(int index) : index_(index) {
  if (index < 0 || index >= kCount) {
    throw std::out_of_range("quarter bin index " + std::to_string(index) + " outside [0, 95]");
  }
}

QuarterBin QuarterBin::from_minute_of_day(int minute) { return QuarterBin(minute / 15); }

QuarterBin quarter_bin(absl::Time instant, const TimeZone& tz) {
  const absl::CivilMinute local = absl::ToCivilMinute(instant, tz.zone());
  return QuarterBin::from_minute_of_day(local.hour() * 60 + local.minute());
}

bool is_typical_workday(absl::Time instant, const TimeZone& tz) {
  switch (absl::GetWeekday(absl::ToCivilDay(instant, tz.zone()))) {
    case absl::Weekday::tuesday:
    case absl::Weekday::wednesday:
    case absl::Weekday::thursday:
      return true;
    default:
      return false;
  }
}

std::vector<GeoEvent> filter_workdays(std::span<const GeoEvent> events, const TimeZone& tz) {
  std::vector<GeoEvent> out;
  out.reserve(events.size());
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [&](const GeoEvent& e) { return is_typical_workday(e.instant, tz); });
  return out;
}

}  // namespace pulse
