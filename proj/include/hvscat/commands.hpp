#ifndef HVSCAT_COMMANDS_HPP
#define HVSCAT_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "hvscat/config.hpp"
#include "hvscat/io.hpp"
#include "hvscat/rates.hpp"

namespace hvs {

struct RunContext {
  ExperimentConfig config;
  fs::path out;                 // overrides config.out_dir when non-empty
  int workers = 1;
  unsigned long long seed = 0;
  std::ostream* log = nullptr;  // progress lines
};

const std::vector<std::string>& command_names();

/// Runs one subcommand, writing CSVs, grid dumps and manifest.txt. Returns the exit status.
int run_command(const std::string& name, const RunContext& ctx);

/// Errors |lhs(v) - oracle| along one probe line and their fitted slope; lhs is the scan value before the I_G division.
struct RateMeasurement {
  std::vector<double> v, error;
  cplx oracle;
  ScanResult scan;
  RateFit fit;
  bool fitted = false;
};
RateMeasurement measure_commutator_rate(const Field2D& phi, const Scene& scene, const Vec2& y, const Vec2& vhat,
                                        const ScanOptions& opt);

/// Pair classes of the configured system, as the rate model needs them.
RateScene rate_scene(const ExperimentConfig& c);

/// Probe lines: the configured one plus `random_probes` drawn from the seed.
std::vector<std::pair<double, Vec2>> probes(const ExperimentConfig& c, unsigned long long seed);

}  // namespace hvs

#endif
