#ifndef HVSCAT_KINEMATICS_HPP
#define HVSCAT_KINEMATICS_HPP

// Pair and Jacobi reduced quantities and high-velocity configurations.
// Everything is templated on the scalar so the same code runs in exact
// rational arithmetic (Rational) or in double.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include "hvscat/errors.hpp"

namespace hvs {

using Rational = boost::multiprecision::cpp_rational;

template <class S>
using VecN = Eigen::Matrix<S, Eigen::Dynamic, 1>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

/// Absolute tolerance of the floating point zero test for relative charges.
inline constexpr double kChargeZeroTol = 1e-12;

inline bool is_zero(double x) { return std::abs(x) <= kChargeZeroTol; }
inline bool is_zero(const Rational& x) { return x == 0; }

/// Parses "3", "-0.25", "1/3" or "2.5e-3" exactly. Throws DomainError otherwise.
Rational parse_rational(const std::string& text);
std::string rational_to_string(const Rational& x);

template <class S>
struct ParticleSystem {
  int n = 2;
  std::vector<S> m;
  std::vector<S> q;
  S E = S(1);
  S eta = S(1);

  int N() const { return static_cast<int>(m.size()); }

  void validate() const {
    std::vector<Violation> bad;
    if (m.size() < 2) bad.push_back({"system", "N >= 2", ""});
    if (q.size() != m.size()) bad.push_back({"system", "one charge per mass", ""});
    if (n < 2) bad.push_back({"system", "n >= 2", ""});
    if (!(E > 0)) bad.push_back({"system", "E > 0", ""});
    for (std::size_t j = 0; j < m.size(); ++j)
      if (!(m[j] > 0)) bad.push_back({"m" + std::to_string(j + 1), "m_j > 0", ""});
    if (!bad.empty()) throw Rejection(std::move(bad));
  }
};

template <class S>
S reduced_mass(const S& mj, const S& mk) {
  if (!(mj > 0) || !(mk > 0)) throw DomainError("reduced_mass: masses must be positive");
  return mj * mk / (mj + mk);
}

template <class S>
S relative_charge(const S& mj, const S& qj, const S& mk, const S& qk) {
  if (!(mj > 0) || !(mk > 0)) throw DomainError("relative_charge: masses must be positive");
  return (qk * mj - qj * mk) / (mj + mk);
}

template <class S>
struct JacobiChain {
  std::vector<S> nu;  // nu[j-1] for j = 1..N-1
  std::vector<S> qR;
  std::vector<S> M;   // partial mass sums of the first j particles
  std::vector<S> Q;
};

template <class S>
JacobiChain<S> jacobi_chain(const ParticleSystem<S>& sys) {
  sys.validate();
  JacobiChain<S> c;
  S M(0), Q(0);
  for (int j = 1; j < sys.N(); ++j) {
    M += sys.m[j - 1];
    Q += sys.q[j - 1];
    const S& mn = sys.m[j];
    c.M.push_back(M);
    c.Q.push_back(Q);
    c.nu.push_back(S(1) / (S(1) / mn + S(1) / M));
    c.qR.push_back((sys.q[j] * M - mn * Q) / (mn + M));
  }
  return c;
}

template <class S>
struct PairFrame {
  int j = 1, k = 2;  // 1-based, j < k
  S mu;
  S q;
  S eta;
  bool charged = false;
};

template <class S>
S pair_eta(const ParticleSystem<S>& sys, int j, int k) {
  const S mu12 = reduced_mass(sys.m[0], sys.m[1]);
  if (j == 1 && k == 2) return sys.eta;
  if (j == 1) return S(2) * (S(1) + sys.eta * mu12 / sys.m[0]);
  if (j == 2) return S(2) * (S(1) + sys.eta * mu12 / sys.m[1]);
  return S(4);
}

template <class S>
std::vector<PairFrame<S>> pair_frames(const ParticleSystem<S>& sys) {
  sys.validate();
  std::vector<PairFrame<S>> out;
  for (int j = 1; j <= sys.N(); ++j)
    for (int k = j + 1; k <= sys.N(); ++k) {
      PairFrame<S> f;
      f.j = j;
      f.k = k;
      f.mu = reduced_mass(sys.m[j - 1], sys.m[k - 1]);
      f.q = relative_charge(sys.m[j - 1], sys.q[j - 1], sys.m[k - 1], sys.q[k - 1]);
      f.eta = pair_eta(sys, j, k);
      f.charged = !is_zero(f.q);
      out.push_back(f);
    }
  return out;
}

using PairIndex = std::pair<int, int>;

struct PairClasses {
  std::vector<PairIndex> zero;
  std::vector<PairIndex> nonzero;
};

template <class S>
PairClasses classify_pairs(const ParticleSystem<S>& sys) {
  PairClasses c;
  for (const auto& f : pair_frames(sys)) (f.charged ? c.nonzero : c.zero).emplace_back(f.j, f.k);
  return c;
}

template <class S>
struct VelocityConfig {
  S v;
  VecN<S> vhat;
  std::vector<VecN<S>> d;          // d_j for j = 3..N
  S delta;
  std::vector<VecN<S>> velocity;   // v_j for j = 1..N
  std::vector<PairIndex> pairs;
  std::vector<VecN<S>> vrel;       // v_jk = v_k - v_j, same order as pairs
  std::vector<S> delta_jk;         // delta if the pair is charged, else 0
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  const VecN<S>& relative(int j, int k) const {
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (pairs[i] == PairIndex{j, k}) return vrel[i];
    throw DomainError("no such pair");
  }
};

namespace detail {
inline bool unit_norm(const double& s) { return std::abs(s - 1.0) <= 1e-12; }
inline bool unit_norm(const Rational& s) { return s == 1; }
inline std::string num(double x) { return std::to_string(x); }
inline std::string num(const Rational& x) { return rational_to_string(x); }
}  // namespace detail

/// Builds all velocities and collects every violated hypothesis.
template <class S>
VelocityConfig<S> check_velocity_config(const ParticleSystem<S>& sys, const S& v, const VecN<S>& vhat,
                                        const std::vector<VecN<S>>& d, const S& delta) {
  sys.validate();
  VelocityConfig<S> c;
  c.v = v;
  c.vhat = vhat;
  c.d = d;
  c.delta = delta;
  auto& bad = c.violations;
  const int N = sys.N(), n = sys.n;

  if (!(v > 0)) bad.push_back({"v", "v > 0", ""});
  if (vhat.size() != n) throw ShapeError("vhat has wrong dimension");
  if (!detail::unit_norm(S(vhat.squaredNorm()))) bad.push_back({"vhat", "|vhat| = 1", ""});
  if (!(delta >= 0) || !(delta < 1)) bad.push_back({"delta", "0 <= delta < 1", ""});
  if (static_cast<int>(d.size()) != N - 2) throw ShapeError("need one d_j per particle j >= 3");
  for (const auto& dj : d)
    if (dj.size() != n) throw ShapeError("d_j has wrong dimension");

  const S mu12 = reduced_mass(sys.m[0], sys.m[1]);
  for (int j = 3; j <= N; ++j) {
    const VecN<S>& dj = d[j - 3];
    const std::string name = "d" + std::to_string(j);
    const S dd = dj.squaredNorm();
    if (dd == 0) {
      bad.push_back({name, "d_j != 0", ""});
      continue;
    }
    for (int k = j + 1; k <= N; ++k)
      if ((dj - d[k - 3]).squaredNorm() == 0)
        bad.push_back({"(" + std::to_string(j) + "," + std::to_string(k) + ")", "d_j - d_k != 0", ""});
    // v > mu12/(m_i |d_j|), squared to stay exact
    for (int i = 1; i <= 2; ++i) {
      const S r = mu12 / sys.m[i - 1];
      if (!(v * v * dd > r * r))
        bad.push_back({"(" + std::to_string(i) + "," + std::to_string(j) + ")",
                       "v > mu12/(m" + std::to_string(i) + " d_" + std::to_string(j) + ")",
                       "v=" + detail::num(v)});
    }
  }

  c.velocity.assign(N, VecN<S>::Zero(n));
  c.velocity[0] = vhat * S(-(v * mu12 / sys.m[0]));
  c.velocity[1] = vhat * S(v * mu12 / sys.m[1]);
  for (int j = 3; j <= N; ++j) c.velocity[j - 1] = d[j - 3] * S(v * v);

  for (const auto& f : pair_frames(sys)) {
    VecN<S> w = c.velocity[f.k - 1] - c.velocity[f.j - 1];
    c.pairs.emplace_back(f.j, f.k);
    c.delta_jk.push_back(f.charged ? delta : S(0));
    if (f.charged) {
      const std::string name = "(" + std::to_string(f.j) + "," + std::to_string(f.k) + ")";
      const S w1 = w(0);
      const S ww = w.squaredNorm();
      if (ww == 0)
        bad.push_back({name, "v_jk != 0", "charged pair at rest"});
      else if (!(w1 * w1 <= delta * delta * ww))
        bad.push_back({name, "|vhat_jk . E| <= delta", "delta=" + detail::num(delta)});
    }
    c.vrel.push_back(std::move(w));
  }
  return c;
}

template <class S>
VelocityConfig<S> build_velocity_config(const ParticleSystem<S>& sys, const S& v, const VecN<S>& vhat,
                                        const std::vector<VecN<S>>& d, const S& delta) {
  auto c = check_velocity_config(sys, v, vhat, d, delta);
  if (!c.valid()) throw Rejection(c.violations);
  return c;
}

/// The same system with every quantity rounded to double.
ParticleSystem<double> to_double(const ParticleSystem<Rational>& s);

}  // namespace hvs

#endif
