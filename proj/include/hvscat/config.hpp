#ifndef HVSCAT_CONFIG_HPP
#define HVSCAT_CONFIG_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hvscat/kinematics.hpp"
#include "hvscat/reconstruction.hpp"

namespace hvs {

struct PairBlock {
  int j = 1, k = 2;
  std::vector<PotentialTerm> terms;
};

/*!
 * Everything a run needs. Text form: `[section]` headers, `key = value` lines,
 * `#` comments. Pair potentials live in `[pair j k]` sections with one
 * `term = class=.. family=.. amplitude=.. width=.. exponent=.. center=x,y` line per term.
 */
struct ExperimentConfig {
  // [system] exact rationals
  std::vector<Rational> masses{Rational(1), Rational(1)};
  std::vector<Rational> charges{Rational(0), Rational(1)};
  Rational E{1}, eta{1}, delta{Rational(1, 2)};
  std::vector<std::array<Rational, 2>> d;  // d_j for j = 3..N

  DecayParams decay;
  std::vector<PairBlock> pairs;
  Grid2D grid{128, 128, 16, 16};

  // [evolution]
  double dt_scale = 0.2;    // scan step is dt_scale / v
  double T0 = 0;
  double T_max = 64;
  double tol = 1e-4;
  double margin_tol = 1e-6;
  bool dollard = true;
  double packet_radius = 0;  // 0: from the packet density
  double correction_tol = 1e-8;
  double prop_dt = 1e-3;     // `propagate`
  double prop_T = 1.0;

  // [experiment]
  std::vector<double> v_list{8, 16, 32, 64};
  int l = 1;
  ScanQuantity quantity = ScanQuantity::commutator;
  Envelope envelope = Envelope::gaussian;
  double packet_w = 0.5;
  Vec2 packet_x0 = Vec2::Zero(), packet_p0 = Vec2::Zero();
  double probe_theta = 1.2;
  Vec2 probe_y = Vec2::Zero();
  int random_probes = 0;     // extra probes drawn with --seed
  int n_angles = 64, n_offsets = 128;
  double ds = 0.1;
  double support_radius = 0;
  bool hann = true;
  int image_n = 128;
  double image_l = 12.8;
  double centre_radius = 2, centre_step = 0.25;
  double rate_margin = 0.01;
  double rate_band = 0.3;

  // [output]
  std::string out_dir = "out";

  ParticleSystem<Rational> system() const;
  /// Distinguished pair (1, 2) as a simulated scene.
  Scene scene() const;
  std::vector<Vec2> centres() const;
  PipelineOptions pipeline() const;
  ScanOptions scan() const;
  PacketSpec packet() const;
};

struct ParseOptions {
  bool strict = true;  // unknown keys are violations; otherwise warnings
};

struct ParseResult {
  ExperimentConfig config;
  std::vector<std::string> warnings;
};

/// Parses and validates; throws Rejection listing every problem found.
ParseResult parse_config(const std::string& text, const ParseOptions& opt = {});
/// Canonical text; doubles at 17 significant digits. The output section is optional.
std::string serialize_config(const ExperimentConfig& c, bool with_output = true);
/// Every constraint violation of an already built config.
std::vector<Violation> validate_config(const ExperimentConfig& c);
/// FNV-1a 64 of the canonical text without the output section.
std::uint64_t config_hash(const ExperimentConfig& c);
std::string hex64(std::uint64_t h);

std::string fmt17(double x);

}  // namespace hvs

#endif
