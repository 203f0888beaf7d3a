#include "hsl/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace hsl {
namespace {

void put_double(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.write(bytes, 8);
}

double get_double(std::istream& in) {
  char bytes[8];
  if (!in.read(bytes, 8)) throw ConfigError("field dump: truncated payload");
  std::uint64_t bits;
  std::memcpy(&bits, bytes, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void write_payload(std::ostream& out, const CubeGrid& g, const std::vector<cplx>& data, const char* kind) {
  nlohmann::json header = {{"R0", g.R0()}, {"n", g.n()}, {"kind", kind}};
  out << header.dump() << '\n';
  for (const cplx& z : data) {
    put_double(out, z.real());
    put_double(out, z.imag());
  }
  if (!out) throw Error("field dump: write failed");
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& f) { write_payload(out, f.grid, f.values, "spatial"); }
void write_field(std::ostream& out, const SpectralField& f) { write_payload(out, f.grid, f.coeffs, "spectral"); }

void write_field(const std::string& path, const ScalarField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_field(out, f);
}

void write_field(const std::string& path, const SpectralField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_field(out, f);
}

AnyField read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("field dump: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field dump: bad header: ") + e.what());
  }
  if (!header.contains("R0") || !header.contains("n") || !header.contains("kind"))
    throw ConfigError("field dump: header needs R0, n and kind");
  CubeGrid g(header["R0"].get<double>(), header["n"].get<int>());
  std::vector<cplx> data(g.size());
  for (auto& z : data) {
    const double re = get_double(in);
    const double im = get_double(in);
    z = cplx(re, im);
  }
  const auto kind = header["kind"].get<std::string>();
  if (kind == "spatial") return ScalarField(g, std::move(data));
  if (kind == "spectral") return SpectralField(g, std::move(data));
  throw ConfigError("field dump: unknown kind '" + kind + "'");
}

AnyField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return read_field(in);
}

}  // namespace hsl
