#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gridsigma/rng.hpp"
#include "gridsigma/scenario.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::scenario {

void LoadProfile::validate() const {
  if (scale.size() != hours * bus_count) {
    throw DomainError("load profile shape mismatch");
  }
  for (double v : scale) {
    if (!(v > 0.0 && v < 4.0)) throw DomainError("load multiplier outside (0, 4)");
  }
}

LoadProfile synth_load_profile(std::size_t hours, std::size_t bus_count, std::uint64_t seed) {
  if (hours == 0) throw DomainError("hours must be at least 1");
  constexpr double kAmplitude = 0.2;
  constexpr double kNoise = 0.03;
  LoadProfile p{hours, bus_count, {}};
  p.scale.reserve(hours * bus_count);
  SeededRng rng(derive_seed(seed, "load-profile"));
  for (std::size_t h = 0; h < hours; ++h) {
    const double daily =
        1.0 + kAmplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(h % 24) / 24.0);
    for (std::size_t b = 0; b < bus_count; ++b) {
      p.scale.push_back(std::clamp(daily + kNoise * rng.normal(), 0.6, 1.4));
    }
  }
  return p;
}

LoadProfile ingest_load_csv(std::string_view csv, std::size_t bus_count) {
  const auto lines = text::split_lines(csv);
  if (lines.empty()) throw ParseError("empty CSV", 0);
  const auto header = text::split(lines[0], ',');
  if (header.size() != bus_count) {
    throw ParseError("header has " + std::to_string(header.size()) + " columns, expected " +
                         std::to_string(bus_count),
                     0);
  }
  for (auto h : header) {
    long long id = 0;
    if (!text::parse_int(h, id)) {
      throw ParseError("header cell '" + std::string(text::trim(h)) + "' is not a bus id", 0);
    }
  }

  LoadProfile p{0, bus_count, {}};
  std::size_t row = 0;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (text::trim(lines[n]).empty()) continue;
    ++row;
    const auto cells = text::split(lines[n], ',');
    if (cells.size() != bus_count) {
      throw DomainError("row " + std::to_string(row) + ": expected " + std::to_string(bus_count) +
                        " columns, found " + std::to_string(cells.size()));
    }
    for (auto cell : cells) {
      double v = 0.0;
      if (!text::parse_double(cell, v)) {
        throw DomainError("row " + std::to_string(row) + ": non-numeric cell '" +
                          std::string(text::trim(cell)) + "'");
      }
      if (!(v > 0.0 && v < 4.0)) {
        throw DomainError("row " + std::to_string(row) + ": multiplier outside (0, 4)");
      }
      p.scale.push_back(v);
    }
  }
  p.hours = row;
  if (p.hours == 0) throw DomainError("CSV has no data rows");
  return p;
}

std::string export_load_csv(const LoadProfile& profile, std::span<const int> bus_ids) {
  if (bus_ids.size() != profile.bus_count) throw DomainError("bus id count mismatch");
  std::ostringstream os;
  for (std::size_t b = 0; b < bus_ids.size(); ++b) os << (b ? "," : "") << bus_ids[b];
  os << '\n';
  for (std::size_t h = 0; h < profile.hours; ++h) {
    const auto row = profile.row(h);
    for (std::size_t b = 0; b < row.size(); ++b) os << (b ? "," : "") << text::exact(row[b]);
    os << '\n';
  }
  return os.str();
}

}  // namespace gridsigma::scenario
