#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "hsl/grid.hpp"

namespace hsl {

/// Binary field dump. A single header line of JSON
///
///   {"R0": <double>, "n": <int>, "kind": "spatial" | "spectral"}
///
/// terminated by '\n', followed by n^3 (re, im) pairs of little-endian IEEE-754
/// doubles in row-major order (last index fastest). Spectral dumps use the FFT
/// slot order of CubeGrid.
void write_field(std::ostream& out, const ScalarField& f);
void write_field(std::ostream& out, const SpectralField& f);
void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const SpectralField& f);

using AnyField = std::variant<ScalarField, SpectralField>;

/// Reads a dump written by write_field. Throws ConfigError on malformed input.
AnyField read_field(std::istream& in);
AnyField read_field(const std::string& path);

}  // namespace hsl
