#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "peatclust/common.hpp"
#include "peatclust/date.hpp"

namespace peatclust {

/// A measurement site, coordinates in decimal degrees.
struct Location {
  std::string id;
  double lon = 0.0;
  double lat = 0.0;
  std::string site;  // optional tag

  friend bool operator==(const Location&, const Location&) = default;
};

/// Displacement observations for one location. Times are integer day
/// offsets from the dataset epoch and strictly increasing.
struct Series {
  std::string location_id;
  std::vector<int> times;     // days since epoch
  std::vector<double> values; // mm

  friend bool operator==(const Series&, const Series&) = default;
};

struct Dataset {
  Date epoch;                       // earliest observed date
  std::vector<Location> locations;  // one Series per Location, same order
  std::vector<Series> series;

  std::size_t size() const { return locations.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Radius neighborhood graph over locations; plain Euclidean distance in
/// (lon, lat) degrees, boundary inclusive, no self-neighbors.
struct NeighborGraph {
  double radius = 0.0;
  std::vector<std::vector<int>> adjacency;

  int degree(std::size_t j) const { return static_cast<int>(adjacency[j].size()); }
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline double parse_double_field(std::string_view s, const std::string& what, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ValidationError("line " + std::to_string(line_no) + ": bad " + what + " '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline constexpr std::string_view kLongCsvHeader = "location_id,lon,lat,date,displacement_mm";

/// Loads the long-format observation CSV. Epoch is the earliest date in
/// the file; per-location rows are sorted by time.
inline Dataset load_long_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  struct Raw {
    Location loc;
    std::vector<std::pair<long, double>> obs;  // (civil day number, value)
  };
  std::vector<Raw> raws;
  std::unordered_map<std::string, std::size_t> index;

  std::string line;
  std::size_t line_no = 0;
  long min_day = 0;
  bool have_min = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kLongCsvHeader)
        throw ValidationError("line 1: expected header '" + std::string(kLongCsvHeader) + "'");
      continue;
    }
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != 5)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                            std::to_string(fields.size()));
    std::string id(fields[0]);
    if (id.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty location_id");
    double lon = detail::parse_double_field(fields[1], "lon", line_no);
    double lat = detail::parse_double_field(fields[2], "lat", line_no);
    if (!(lon >= -180.0 && lon <= 180.0))
      throw ValidationError("line " + std::to_string(line_no) + ": lon out of [-180,180]");
    if (!(lat >= -90.0 && lat <= 90.0))
      throw ValidationError("line " + std::to_string(line_no) + ": lat out of [-90,90]");
    Date date;
    try {
      date = parse_iso_date(fields[3]);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    double value = detail::parse_double_field(fields[4], "displacement_mm", line_no);
    if (!std::isfinite(value))
      throw ValidationError("line " + std::to_string(line_no) + ": non-finite displacement");

    auto [it, inserted] = index.try_emplace(id, raws.size());
    if (inserted) raws.push_back(Raw{Location{id, lon, lat, ""}, {}});
    Raw& raw = raws[it->second];
    if (!inserted && (raw.loc.lon != lon || raw.loc.lat != lat))
      throw ValidationError("line " + std::to_string(line_no) + ": location '" + id +
                            "' repeated with different coordinates");
    long day = days_from_civil(date);
    raw.obs.emplace_back(day, value);
    if (!have_min || day < min_day) {
      min_day = day;
      have_min = true;
    }
  }
  if (raws.empty()) throw ValidationError("'" + path + "' contains no observations");

  Dataset ds;
  ds.epoch = civil_from_days(min_day);
  for (Raw& raw : raws) {
    std::sort(raw.obs.begin(), raw.obs.end());
    for (std::size_t i = 1; i < raw.obs.size(); ++i)
      if (raw.obs[i].first == raw.obs[i - 1].first)
        throw ValidationError("duplicate observation for location '" + raw.loc.id + "' on " +
                              format_iso_date(civil_from_days(raw.obs[i].first)));
    if (raw.obs.size() < 4)
      throw ValidationError("location '" + raw.loc.id + "' has only " +
                            std::to_string(raw.obs.size()) + " observations; at least 4 required");
    Series s;
    s.location_id = raw.loc.id;
    s.times.reserve(raw.obs.size());
    s.values.reserve(raw.obs.size());
    for (auto& [day, value] : raw.obs) {
      s.times.push_back(static_cast<int>(day - min_day));
      s.values.push_back(value);
    }
    ds.locations.push_back(std::move(raw.loc));
    ds.series.push_back(std::move(s));
  }
  return ds;
}

/// Writes the long-format CSV; load_long_csv(write_long_csv(ds)) == ds
/// for datasets without site tags (the format has no site column).
inline void write_long_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << kLongCsvHeader << '\n';
  char buf[512];
  for (std::size_t j = 0; j < ds.size(); ++j) {
    const Location& loc = ds.locations[j];
    const Series& s = ds.series[j];
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      Date d = add_days(ds.epoch, s.times[i]);
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%s,%.17g\n", loc.id.c_str(), loc.lon, loc.lat,
                    format_iso_date(d).c_str(), s.values[i]);
      out << buf;
    }
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

/// Builds the radius graph. Bucketed by radius-sized cells so large N is
/// cheap; equivalent to the all-pairs check.
inline NeighborGraph build_neighborhoods(std::span<const Location> locations, double radius) {
  if (!(radius > 0.0)) throw ValidationError("neighborhood radius must be > 0");
  const std::size_t n = locations.size();
  NeighborGraph g;
  g.radius = radius;
  g.adjacency.assign(n, {});

  std::map<std::pair<long, long>, std::vector<int>> cells;
  auto cell_of = [&](const Location& l) {
    return std::pair<long, long>{static_cast<long>(std::floor(l.lon / radius)),
                                 static_cast<long>(std::floor(l.lat / radius))};
  };
  for (std::size_t j = 0; j < n; ++j) cells[cell_of(locations[j])].push_back(static_cast<int>(j));

  const double r2 = radius * radius;
  for (std::size_t j = 0; j < n; ++j) {
    auto [cx, cy] = cell_of(locations[j]);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = cells.find({cx + dx, cy + dy});
        if (it == cells.end()) continue;
        for (int h : it->second) {
          if (h == static_cast<int>(j)) continue;
          const double ex = locations[j].lon - locations[h].lon;
          const double ey = locations[j].lat - locations[h].lat;
          if (ex * ex + ey * ey <= r2) g.adjacency[j].push_back(h);
        }
      }
    }
    std::sort(g.adjacency[j].begin(), g.adjacency[j].end());
  }
  return g;
}

}  // namespace peatclust
