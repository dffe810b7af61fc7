#include "aclab/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "aclab/errors.hpp"

namespace aclab {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
  std::string buf;
  buf.reserve(24 + 8 * f.v.size());
  put_u32(buf, static_cast<std::uint32_t>(f.grid.d));
  put_u32(buf, static_cast<std::uint32_t>(f.grid.n));
  put_f64(buf, f.grid.L);
  put_f64(buf, f.time);
  for (double x : f.v) put_f64(buf, x);
  write_text_file(path, buf);
}

ScalarField read_field(const std::string& path) {
  const std::string buf = read_text_file(path);
  if (buf.size() < 24) throw std::runtime_error("field record truncated: " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  const std::uint32_t d = get_u32(p);
  const std::uint32_t n = get_u32(p + 4);
  const double L = get_f64(p + 8);
  const double time = get_f64(p + 16);
  GridSpec grid(static_cast<int>(d), static_cast<int>(n), L);
  const std::size_t expect = 24 + 8 * static_cast<std::size_t>(grid.site_count());
  if (buf.size() != expect) throw std::runtime_error("field record size mismatch: " + path);
  ScalarField f(grid, time);
  for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] = get_f64(p + 24 + 8 * i);
  if (!all_finite(f)) throw NonFiniteInput("field record holds non-finite values: " + path);
  return f;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  const std::string buf = read_text_file(path);
  return fnv1a64(buf.data(), buf.size());
}

std::string hex64(std::uint64_t v) {
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(v));
  return std::string(out);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string stats_csv(const std::vector<StatRow>& rows) {
  std::string out = "lambda,epsilon,t,statistic,value,se\n";
  for (const StatRow& r : rows) {
    out += format_double(r.lambda);
    out += ',';
    out += format_double(r.eps);
    out += ',';
    out += format_double(r.t);
    out += ',';
    out += r.statistic;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += format_double(r.se);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (is.bad()) throw std::runtime_error("read failed: " + path);
  return buf;
}

}  // namespace aclab
