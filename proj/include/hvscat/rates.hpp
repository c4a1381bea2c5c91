#ifndef HVSCAT_RATES_HPP
#define HVSCAT_RATES_HPP

#include <string>
#include <vector>

#include "hvscat/errors.hpp"
#include "hvscat/potentials.hpp"

namespace hvs {

/// What the rate analysis needs to know about one pair j < k (1-based labels).
struct PairRateInput {
  int j = 1, k = 2;
  bool charged = false;     // q_jk != 0
  bool has_short = false;   // V^s_jk != 0
  bool has_long = false;    // V^l_jk != 0
};

struct RateScene {
  std::vector<PairRateInput> pairs;  // the distinguished pair is (1, 2)
  DecayParams params;                 // gamma1, gamma, alpha, gammaD, mu, rho
  double margin = 0.01;               // open suprema are realized as bound - margin
};

struct PairRate {
  int j = 1, k = 2;
  std::string zeta;        // "a", "b" or "c"
  double theta = 0;
  double sigma_tilde = 1;
  double sigma = 1;
};

struct RatePrediction {
  std::vector<PairRate> pairs;
  double alpha = 1;
  double sigma_min = 1;
  double gamma2 = 2;
  double rho_cap = 1;        // 2 min{alpha, sigma} - 1
  double rho = 1;            // rho actually used in the case table
  double rho_l_bound = 0;    // strict upper bound for rho_l, when a rho_l case applies
  double margin = 0.01;

  int case_index = 0;        // 1..5 in the order of the reconstruction formula's list
  std::string case_label;    // e.g. "O(v^-rho)"
  bool open_bound = false;   // true when the exponent is a supremum minus the margin
  double exponent = 0;

  std::string wave_case;     // wave-operator error
  double wave_exponent = 0;

  bool has_graf = false;     // a short-range tail on the distinguished pair
  double graf_exponent = 0;  // |I_G - 1| decay
  std::string graf_case;

  std::vector<Violation> violations;
  bool admissible() const { return violations.empty(); }
};

RatePrediction predict_exponent(const RateScene& scene);

/// The zeta condition of pair (j, k) against the zero-charge long-range pairs of the scene.
std::string zeta_case(const RateScene& scene, const PairRateInput& p);

struct RateFit {
  double exponent = 0;    // -slope of log error against log v
  double half_width = 0;  // two standard errors of the slope
  double prefactor = 0;
  double residual = 0;    // rms of the log residuals
};

RateFit fit_rate(const std::vector<double>& v, const std::vector<double>& err);

}  // namespace hvs

#endif
