#pragma once

// Persistence: flat binary field records, deterministic CSV statistics
// tables, and content digests for the run manifest.

#include <cstdint>
#include <string>
#include <vector>

#include "aclab/field.hpp"

namespace aclab {

// Record layout: u32 d, u32 n, f64 L, f64 time (all little-endian), then
// n^d f64 values in row-major lattice order.
void write_field(const std::string& path, const ScalarField& f);
ScalarField read_field(const std::string& path);

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t v);

// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

struct StatRow {
  double lambda = 0.0;
  double eps = 0.0;
  double t = 0.0;
  std::string statistic;
  double value = 0.0;
  double se = 0.0;
};

// Deterministic text: fixed header, rows in the given order, round-trip
// number formatting.
std::string stats_csv(const std::vector<StatRow>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace aclab
