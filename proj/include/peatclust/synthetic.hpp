#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "peatclust/dataset.hpp"

namespace peatclust {

/// One synthetic condition archetype: an annual cosine peaking at
/// `peak_day_of_year` plus a linear trend. `coherent_cycle = false`
/// replaces the annual cosine with a small two-tone wobble that has no
/// annual structure.
struct Archetype {
  int peak_day_of_year = 36;
  double amplitude_mm = 10.0;
  double trend_slope_mm_per_year = 0.0;
  bool coherent_cycle = true;
};

struct SynthConfig {
  std::array<int, 3> n_per_cluster{10, 10, 10};
  double noise_sd = 0.0;  // mm
  std::uint64_t seed = 1;
  double grid_spacing_deg = 0.001;
  Date epoch{2015, 3, 12};
  double lon0 = -3.94;
  double lat0 = 58.39;
  // Defaults: winter-peaking large oscillation / autumn-peaking moderate
  // oscillation / incoherent wobble with a steep downward trend.
  std::array<Archetype, 3> archetypes{
      Archetype{36, 10.0, 0.0, true},
      Archetype{288, 4.0, 0.0, true},
      Archetype{288, 1.0, -15.0, false},
  };
};

struct SynthResult {
  Dataset dataset;
  std::vector<int> labels;            // 0-based archetype index per location
  std::vector<double> noiseless;      // flattened noiseless values, row per location
  std::size_t obs_per_location = 0;
};

namespace detail {

/// Observation day offsets mirroring a 12-day then 6-day revisit cadence:
/// 61 x 12-day steps then 140 x 6-day steps, 202 samples spanning 1572 days.
inline std::vector<int> default_observation_schedule() {
  std::vector<int> t;
  t.reserve(202);
  int day = 0;
  t.push_back(day);
  for (int i = 0; i < 61; ++i) t.push_back(day += 12);
  for (int i = 0; i < 140; ++i) t.push_back(day += 6);
  return t;
}

/// Day offset (days since epoch) of the first occurrence of the given
/// day-of-year on or after the epoch.
inline int first_day_of_year_on_or_after(const Date& epoch, int day_of_year) {
  for (int year = epoch.year; year <= epoch.year + 1; ++year) {
    Date jan1{year, 1, 1};
    Date d = add_days(jan1, day_of_year - 1);
    long off = days_between(epoch, d);
    if (off >= 0) return static_cast<int>(off);
  }
  throw ValidationError("invalid day of year");
}

}  // namespace detail

/// Noiseless displacement of archetype `a` at day offset `t` (days since epoch).
inline double archetype_value(const Archetype& a, const Date& epoch, double t) {
  constexpr double kYear = 365.25;
  const double trend = a.trend_slope_mm_per_year / kYear * t;
  if (!a.coherent_cycle) {
    // Two incommensurate tones, neither annual.
    const double two_pi = 2.0 * std::numbers::pi;
    return trend + a.amplitude_mm * (0.6 * std::sin(two_pi * t / 193.0) +
                                     0.4 * std::sin(two_pi * t / 89.0));
  }
  const int peak = detail::first_day_of_year_on_or_after(epoch, a.peak_day_of_year);
  return trend + a.amplitude_mm * std::cos(2.0 * std::numbers::pi * (t - peak) / kYear);
}

/// Deterministic synthetic dataset: three archetypes laid out in adjacent
/// rectangular blocks so radius neighborhoods stay within (mostly) one
/// cluster, plus iid Gaussian observation noise.
inline SynthResult synthesize_dataset(const SynthConfig& cfg) {
  for (int c : cfg.n_per_cluster)
    if (c < 1) throw ValidationError("n_per_cluster entries must be >= 1");
  if (cfg.noise_sd < 0.0) throw ValidationError("noise_sd must be >= 0");
  if (!(cfg.grid_spacing_deg > 0.0)) throw ValidationError("grid spacing must be > 0");

  const std::vector<int> schedule = detail::default_observation_schedule();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_sd);

  SynthResult out;
  out.dataset.epoch = cfg.epoch;
  out.obs_per_location = schedule.size();

  int col_offset = 0;
  int loc_counter = 0;
  for (int c = 0; c < 3; ++c) {
    const int n = cfg.n_per_cluster[static_cast<std::size_t>(c)];
    const int width = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    for (int k = 0; k < n; ++k) {
      const int row = k / width;
      const int col = k % width;
      Location loc;
      char idbuf[32];
      std::snprintf(idbuf, sizeof idbuf, "loc_%05d", loc_counter++);
      loc.id = idbuf;
      loc.lon = cfg.lon0 + (col_offset + col) * cfg.grid_spacing_deg;
      loc.lat = cfg.lat0 + row * cfg.grid_spacing_deg;

      Series s;
      s.location_id = loc.id;
      s.times = schedule;
      s.values.reserve(schedule.size());
      const Archetype& a = cfg.archetypes[static_cast<std::size_t>(c)];
      for (int t : schedule) {
        const double clean = archetype_value(a, cfg.epoch, t);
        out.noiseless.push_back(clean);
        s.values.push_back(cfg.noise_sd > 0.0 ? clean + noise(rng) : clean);
      }
      out.dataset.locations.push_back(std::move(loc));
      out.dataset.series.push_back(std::move(s));
      out.labels.push_back(c);
    }
    col_offset += width;  // blocks adjacent: boundary columns are neighbors
  }
  return out;
}

/// `location_id,true_label` with 1-based labels.
inline void write_labels_csv(const SynthResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "location_id,true_label\n";
  for (std::size_t j = 0; j < r.labels.size(); ++j)
    out << r.dataset.locations[j].id << ',' << (r.labels[j] + 1) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace peatclust
