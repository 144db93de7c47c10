// Plain-text spectrum files.
//
//   d N k
//   w_1 w_2 ... w_d re im      (k lines)
//
// Coefficients are written in shortest round-trip decimal form, so
// write(read(write(s))) is byte-identical to write(s). Lines starting with
// '#' are comments and are skipped by the reader.
#pragma once

#include "sfft/spectral_model.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace sfft {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

void write_spectrum(std::ostream& os, const SparseSpectrum& spectrum);
SparseSpectrum read_spectrum(std::istream& is);

void write_spectrum_file(const std::string& path, const SparseSpectrum& spectrum);
SparseSpectrum read_spectrum_file(const std::string& path);

std::string format_double(double value);

}  // namespace sfft
