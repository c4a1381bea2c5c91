#include "hvscat/io.hpp"

#include <bit>
#include <boost/version.hpp>
#include <Eigen/Core>
#include <fftw3.h>

#include "json.hpp"
#include "hvscat/config.hpp"

namespace hvs {

CsvWriter::CsvWriter(const fs::path& path, std::vector<std::string> header)
    : path_(path), os_(path), width_(header.size()) {
  if (!os_) throw Error("cannot open " + path.string());
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw ShapeError("csv row width mismatch in " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
    if (i) os_ << ',';
    if (quote) {
      os_ << '"';
      for (char c : cells[i]) os_ << (c == '"' ? "\"\"" : std::string(1, c));
      os_ << '"';
    } else {
      os_ << cells[i];
    }
  }
  os_ << '\n';
}

std::string CsvWriter::num(double x) { return fmt17(x); }

void write_grid(const fs::path& base, const CArray& data, const Grid2D& g, const std::string& description) {
  static_assert(std::endian::native == std::endian::little, "grid dumps assume a little-endian host");
  if (data.rows() != g.ny || data.cols() != g.nx) throw ShapeError("write_grid: shape");
  fs::path bin = base, side = base;
  bin += ".bin";
  side += ".json";
  std::ofstream b(bin, std::ios::binary);
  if (!b) throw Error("cannot open " + bin.string());
  b.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size() * sizeof(cplx)));
  nlohmann::ordered_json j;
  j["description"] = description;
  j["file"] = bin.filename().string();
  j["dtype"] = "complex128";
  j["layout"] = "row-major, ny rows of nx values, (re, im) pairs";
  j["nx"] = g.nx;
  j["ny"] = g.ny;
  j["lx"] = g.lx;
  j["ly"] = g.ly;
  j["origin"] = {g.origin(0), g.origin(1)};
  j["x_of_column"] = "origin_x + (i - nx/2) * lx/nx";
  std::ofstream(side) << j.dump(2) << "\n";
}

CArray read_grid(const fs::path& base, Grid2D* g) {
  fs::path bin = base, side = base;
  bin += ".bin";
  side += ".json";
  std::ifstream s(side);
  if (!s) throw Error("cannot open " + side.string());
  const auto j = nlohmann::json::parse(s);
  Grid2D gg{j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("lx").get<double>(), j.at("ly").get<double>()};
  gg.origin = Vec2(j.at("origin")[0].get<double>(), j.at("origin")[1].get<double>());
  CArray d(gg.ny, gg.nx);
  std::ifstream b(bin, std::ios::binary);
  b.read(reinterpret_cast<char*>(d.data()), std::streamsize(d.size() * sizeof(cplx)));
  if (!b) throw ShapeError("grid dump shorter than its sidecar says: " + bin.string());
  if (g) *g = gg;
  return d;
}

std::vector<std::pair<std::string, std::string>> versions() {
  return {
      {"hvscat", "0.1.0"},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                    std::to_string(BOOST_VERSION % 100)},
      {"fftw", fftw_version},
      {"compiler", __VERSION__},
  };
}

void write_manifest(const fs::path& path, const Manifest& m) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string());
  os << "command = " << m.command << "\n";
  os << "config_hash = " << m.config_hash << "\n";
  os << "workers = " << m.workers << "\n";
  os << "seed = " << m.seed << "\n";
  os << "status = " << m.status << "\n";
  for (const auto& [k, v] : versions()) os << "version." << k << " = " << v << "\n";
  for (const auto& [k, v] : m.timings) os << "seconds." << k << " = " << fmt17(v) << "\n";
  for (const auto& f : m.files) os << "file = " << f << "\n";
  for (const auto& n : m.notes) os << "note = " << n << "\n";
}

}  // namespace hvs
