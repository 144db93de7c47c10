#include "sfft/spectrum_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace sfft {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, int line, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && field.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line, std::string("malformed ") + what + " '" + std::string(field) + "'");
  }
  return value;
}

bool skippable(std::string_view line) {
  const auto fields = split_fields(line);
  return fields.empty() || fields.front().front() == '#';
}

}  // namespace

ParseError::ParseError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_spectrum(std::ostream& os, const SparseSpectrum& spectrum) {
  os << spectrum.dimension() << ' ' << spectrum.bandwidth() << ' ' << spectrum.size() << '\n';
  for (const auto& [w, a] : spectrum) {
    for (Eigen::Index l = 0; l < w.size(); ++l) os << w[l] << ' ';
    os << format_double(a.real()) << ' ' << format_double(a.imag()) << '\n';
  }
}

SparseSpectrum read_spectrum(std::istream& is) {
  std::string line;
  int lineno = 0;

  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      if (!skippable(line)) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(lineno + 1, "missing header 'd N k'");
  const auto header = split_fields(line);
  if (header.size() != 3) throw ParseError(lineno, "header must be 'd N k'");
  const int d = parse_number<int>(header[0], lineno, "dimension");
  const auto N = parse_number<std::int64_t>(header[1], lineno, "bandwidth");
  const auto k = parse_number<std::int64_t>(header[2], lineno, "sparsity");
  if (d < 1) throw ParseError(lineno, "dimension must be >= 1");
  if (N < 2 || N % 2 != 0) throw ParseError(lineno, "bandwidth must be even and >= 2");
  if (k < 0) throw ParseError(lineno, "sparsity must be >= 0");

  SparseSpectrum spectrum(d, N);
  for (std::int64_t j = 0; j < k; ++j) {
    if (!next_line()) throw ParseError(lineno + 1, "expected " + std::to_string(k) + " mode lines");
    const auto fields = split_fields(line);
    if (fields.size() != static_cast<std::size_t>(d) + 2) {
      throw ParseError(lineno, "expected " + std::to_string(d + 2) + " fields, got " +
                                   std::to_string(fields.size()));
    }
    FrequencyVector w(d);
    for (int l = 0; l < d; ++l) w[l] = parse_number<std::int64_t>(fields[l], lineno, "frequency");
    const double re = parse_number<double>(fields[d], lineno, "real part");
    const double im = parse_number<double>(fields[d + 1], lineno, "imaginary part");
    if (!spectrum.in_range(w)) throw ParseError(lineno, "frequency outside [-N/2, N/2)");
    if (spectrum.contains(w)) throw ParseError(lineno, "duplicate frequency vector");
    if (re == 0.0 && im == 0.0) throw ParseError(lineno, "zero coefficient");
    spectrum.insert(w, Complex(re, im));
  }
  if (next_line()) throw ParseError(lineno, "trailing data after " + std::to_string(k) + " modes");
  return spectrum;
}

void write_spectrum_file(const std::string& path, const SparseSpectrum& spectrum) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_spectrum(os, spectrum);
}

SparseSpectrum read_spectrum_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_spectrum(is);
}

}  // namespace sfft
