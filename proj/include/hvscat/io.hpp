#ifndef HVSCAT_IO_HPP
#define HVSCAT_IO_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "hvscat/grid.hpp"

namespace hvs {

namespace fs = std::filesystem;

/// Comma separated rows under a fixed header; numbers at 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const fs::path& path() const { return path_; }
  static std::string num(double x);
  static std::string num(long x) { return std::to_string(x); }
  static std::string num(int x) { return std::to_string(x); }

 private:
  fs::path path_;
  std::ofstream os_;
  std::size_t width_;
};

/// Writes base.bin (row-major complex128, little endian, re/im interleaved) and base.json.
void write_grid(const fs::path& base, const CArray& data, const Grid2D& g, const std::string& description);
/// Reads a dump written by write_grid.
CArray read_grid(const fs::path& base, Grid2D* g = nullptr);

struct Manifest {
  std::string command;
  std::string config_hash;
  int workers = 1;
  unsigned long long seed = 0;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> files;
  std::vector<std::string> notes;
  int status = 0;
};

/// Library versions this binary was built against.
std::vector<std::pair<std::string, std::string>> versions();
void write_manifest(const fs::path& path, const Manifest& m);

}  // namespace hvs

#endif
