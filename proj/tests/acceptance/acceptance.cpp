// Acceptance checks. Usage: acceptance <n> [<n> ...] or acceptance all.
// Each criterion prints one line "criterion <n>: PASS|FAIL <details>".

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "hvscat/commands.hpp"
#include "hvscat/config.hpp"
#include "hvscat/radon.hpp"
#include "hvscat/rates.hpp"
#include "hvscat/reconstruction.hpp"
#include "hvscat/scattering.hpp"

using namespace hvs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig reference_config() {
  std::ifstream in(std::string(HVSCAT_SOURCE_DIR) + "/configs/reference.cfg");
  if (!in) throw DomainError("cannot open configs/reference.cfg");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str()).config;
}

PotentialTerm term(ClassTag cls, Family fam, double A, double w, double exponent = 1, Vec2 c = Vec2::Zero()) {
  PotentialTerm t;
  t.cls = cls;
  t.family = fam;
  t.amplitude = A;
  t.width = w;
  t.exponent = exponent;
  t.center = c;
  return t;
}

double rel_l2(const Field2D& a, const Field2D& b) { return std::sqrt((a.data - b.data).abs2().sum() / b.data.abs2().sum()); }

// ---- 1: split-step vs exact free Stark evolution --------------------------
Outcome avron_herbst() {
  const auto t0 = std::chrono::steady_clock::now();
  const StarkParams sp{0.5, 1.0, 1.0};
  const Grid2D g{256, 256, 64, 64};
  PacketSpec ps;
  ps.w = 1;
  ps.x0 = Vec2(-3, 1);
  ps.p0 = Vec2(0.5, -0.4);
  const Field2D f = make_packet(g, ps);
  EvolutionPlan plan;
  plan.dt = 1e-3;
  plan.T = 1;
  plan.gauge = Gauge::lab;
  const Field2D split_step = evolve(f, 0, 1, plan, PairPotential{}, sp);
  const Field2D exact = free_evolve_exact(f, 1, sp);
  const double err = rel_l2(split_step, exact), sec = seconds_since(t0);
  return {err <= 1e-6 && sec <= 60, fmt("rel L2 %.3g (tol 1e-6), %.1f s", err, sec)};
}

// ---- 2: packet centre follows the classical Stark trajectory --------------
Outcome ehrenfest() {
  const Grid2D g{256, 256, 64, 64};
  const double dx = g.dx();
  PacketSpec ps;
  ps.w = 1;
  ps.x0 = Vec2(-2, 1);
  ps.p0 = Vec2(0.6, -0.5);
  double worst = 0;
  for (double q : {0.0, 1.0, -1.0}) {
    const StarkParams sp{0.5, q, 1.0};
    EvolutionPlan plan;
    plan.dt = 1e-3;
    plan.gauge = Gauge::lab;
    Field2D f = make_packet(g, ps);
    for (int k = 1; k <= 8; ++k) {
      const double ta = 0.25 * (k - 1), tb = 0.25 * k;
      f = evolve(f, ta, tb, plan, PairPotential{}, sp);
      const Vec2 want = ps.x0 + ps.p0 * tb / sp.mu + Vec2(q * sp.E * tb * tb / (2 * sp.mu), 0);
      worst = std::max(worst, (position_mean(f) - want).norm());
    }
  }
  return {worst <= 2 * dx, fmt("largest centre offset %.3g over t in [0, 2], q in {0, 1, -1} (tol 2dx = %.3g)", worst, 2 * dx)};
}

// ---- 3: V = 0 gives the identity through the full sandwich ----------------
Outcome zero_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  Scene sc;
  sc.sp = StarkParams{4.0, 1.0, 1.0};
  const Grid2D g{128, 128, 32, 32};
  PacketSpec a, b;
  a.w = 1;
  a.x0 = Vec2(0.3, -0.2);
  a.p0 = Vec2(0.2, 0.1);
  b.w = 1.2;
  b.x0 = Vec2(-0.4, 0.5);
  b.p0 = Vec2(-0.3, 0.4);
  const Field2D Phi = make_packet(g, a), Psi = make_packet(g, b);
  SandwichOptions so;
  so.T0 = 2;
  so.T_max = 8;
  so.record_all = true;
  so.packet_radius = 4;
  double worst = 0;
  for (double speed : {8.0, 32.0}) {
    const Vec2 v = speed * direction(1.2), y(0.5, 0.3);
    EvolutionPlan plan;
    plan.dt = 0.2 / speed;
    for (int l : {1, 2}) {
      const ScatterRun r = apply_sandwich({momentum_op(Phi, l), Phi, Psi}, sc, v, y, plan, so);
      const cplx comm = speed * cplx(0, 1) * (inner(r.out[0], Psi) - inner(r.out[1], momentum_op(Psi, l)));
      worst = std::max(worst, std::abs(comm));
      worst = std::max(worst, std::abs(inner(Phi, r.out[2]) - inner(Phi, Psi)));
    }
  }
  {
    // lab frame S^D on a boosted state; a light pair at low speed keeps mu v on the lattice
    Scene light;
    light.sp = StarkParams{0.5, 1.0, 1.0};
    const Grid2D gl{256, 256, 64, 64};
    const Field2D P = make_packet(gl, a), Q = make_packet(gl, b);
    const Vec2 v = 4 * direction(1.2);
    EvolutionPlan plan;
    plan.dt = 0.05;
    SandwichOptions lo = so;
    lo.T0 = 1;
    lo.T_max = 4;
    const ScatterRun lab = apply_sd(hvs::boost(Q, light.sp.mu, v), light, v, plan, lo);
    worst = std::max(worst, std::abs(inner(hvs::boost(P, light.sp.mu, v), lab.out[0]) - inner(P, Q)));
  }
  const double sec = seconds_since(t0);
  return {worst <= 1e-7 && sec <= 60, fmt("largest deviation %.3g (tol 1e-7), %.1f s", worst, sec)};
}

// ---- 4 ---------------------------------------------------------------------
Outcome radon() {
  const PhantomReport r = radon_selftest(180, 256, 0.02);
  return {r.passed, fmt("phantom rel L2 %.4f (tol 0.02), %.1f s", r.rel_l2, r.seconds)};
}

// ---- 5: Graf phase decay for a power tail ---------------------------------
Outcome graf_rate() {
  const StarkParams sp{0.5, 1.0, 1.0};
  const PairPotential Vs({term(ClassTag::sE, Family::power_tail, 1, 1, 0.75)});
  std::vector<double> v, err, phase;
  std::string vals;
  for (double s = 4; s <= 256; s *= 2) {
    const cplx I = graf_phase(s * direction(1.2), sp, Vs);
    v.push_back(s);
    err.push_back(std::abs(I - 1.0));
    phase.push_back(std::abs(std::arg(I)));
    vals += fmt(" %g:%.3g", s, err.back());
  }
  const RateFit f = fit_rate(v, err);
  // diagnostic: slope of the phase itself between the two largest speeds
  const std::size_t n = v.size();
  const double ps = std::log(phase[n - 1] / phase[n - 2]) / std::log(v[n - 1] / v[n - 2]);
  const std::string diag = fmt("; phase slope %g..%g: %.3f", v[n - 2], v[n - 1], ps);
  const double want = 2 * 0.75 - 1;
  return {std::abs(f.exponent - want) <= 0.1, fmt("slope %.3f +- %.3f, expected %.2f +- 0.1; |I - 1|%s%s", -f.exponent,
                                                  f.half_width, -want, vals.c_str(), diag.c_str())};
}

// ---- 6: scan limits agree with the X-ray oracle ----------------------------
Outcome oracle_agreement() {
  ExperimentConfig c = reference_config();
  c.grid = Grid2D{512, 512, 64, 64};
  const Scene sc = c.scene();
  const Field2D phi = make_packet(c.grid, c.packet());
  const auto lines = probes(c, 7);
  bool pass = true;
  double worst_ratio = 0;
  int n = 0;
  for (int l : {1, 2}) {
    c.l = l;
    const ScanOptions so = c.scan();
    for (const auto& [theta, y] : lines) {
      const auto t0 = std::chrono::steady_clock::now();
      const Vec2 vh = direction(theta);
      const ScanResult r = hv_scan(phi, phi, y, vh, sc, so);
      const cplx oracle = xray_rhs(phi, phi, y, vh, l, sc.V);
      const double diff = std::abs(r.limit - oracle), bound = r.residual + 2 * so.sandwich.tol;
      const bool ok = r.fit.ok && diff <= bound;
      pass = pass && ok;
      worst_ratio = std::max(worst_ratio, diff / bound);
      ++n;
      std::printf("  l=%d theta=%.4f y=(%.3f, %.3f): |limit - oracle| %.3g, bound %.3g%s, %.0f s\n", l, theta, y(0),
                  y(1), diff, bound, ok ? "" : " (fail)", seconds_since(t0));
    }
  }
  return {pass, fmt("%d probe lines on 512^2, largest |limit - oracle| / bound = %.2f", n, worst_ratio)};
}

// ---- 7: commutator error slope vs the predicted exponent ------------------
Outcome rate_slope() {
  ExperimentConfig c = reference_config();
  c.decay.gamma = c.decay.alpha = 0.75;
  c.pairs[0].terms.push_back(term(ClassTag::sE, Family::power_tail, 0.2, 1, 0.75));
  c.v_list = {8, 16, 32, 64};
  const RatePrediction p = predict_exponent(rate_scene(c));
  const Scene sc = c.scene();
  const Field2D phi = make_packet(c.grid, c.packet());
  const auto t0 = std::chrono::steady_clock::now();
  const RateMeasurement m = measure_commutator_rate(phi, sc, c.probe_y, direction(c.probe_theta), c.scan());
  std::string errs;
  for (std::size_t i = 0; i < m.v.size(); ++i) errs += fmt(" %g:%.3g", m.v[i], m.error[i]);
  const bool pass = m.fitted && std::abs(m.fit.exponent - p.exponent) <= 0.3;
  return {pass, fmt("case %d %s, predicted %.3f, fitted %.3f +- %.3f; errors%s; %.0f s", p.case_index,
                    p.case_label.c_str(), p.exponent, m.fit.exponent, m.fit.half_width, errs.c_str(), seconds_since(t0))};
}

struct Recovery {
  std::vector<Vec2> centres;
  std::vector<cplx> value;
  PipelineResult run;
};

// bump scene, packets of width feature / 8
Recovery bump_recovery(const PotentialTerm& bump, bool vs_pipeline) {
  Scene sc;
  sc.sp = StarkParams{2.0, 1.0, 1.0};
  sc.V.vs = PairPotential({bump});
  const Grid2D g{96, 96, 12, 12};
  PacketSpec ps;
  ps.w = bump.width / 8;
  const Field2D phi = make_packet(g, ps);
  PipelineOptions o;
  o.n_angles = 24;
  o.n_offsets = 60;
  o.ds = 0.25;
  o.support_radius = 4.5;
  o.packet_radius = 2.7;
  o.image = Grid2D{128, 128, 12.8, 12.8};
  o.fbp.hann = false;
  o.scan.v_list = {32, 64, 128, 256};
  o.scan.sandwich.packet_radius = 2.7;
  o.scan.quantity = vs_pipeline ? ScanQuantity::vs_only : ScanQuantity::commutator;
  Recovery r;
  for (double x = -4; x <= 4; x += 0.25)
    for (double y = -4; y <= 4; y += 0.25)
      if (x * x + y * y < 16) r.centres.emplace_back(x, y);
  r.run = vs_pipeline ? recover_vs(phi, sc, r.centres, o) : pointwise_pipeline(phi, sc, r.centres, o);
  r.value = r.run.estimate.value;
  return r;
}

// ---- 8: end-to-end recovery of a compact bump -----------------------------
Outcome bump_pipeline() {
  const PotentialTerm bump = term(ClassTag::vsE, Family::bump, 1, 4);
  const Recovery r = bump_recovery(bump, false);
  double worst = 0;
  for (std::size_t k = 0; k < r.centres.size(); ++k)
    worst = std::max(worst, std::abs(r.value[k].real() - bump.value(r.centres[k])));
  const double peak = bump.value(Vec2::Zero());
  return {worst <= 0.1 * peak, fmt("max error %.4f of peak %.3g inside the bump (tol 10%%); %ld runs, %ld flagged, %.0f s",
                                   worst / peak, peak, r.run.samples_run, r.run.samples_flagged, r.run.wall_seconds)};
}

// ---- 9: vs recovery with a known short-range tail -------------------------
Outcome vs_pipeline() {
  const PotentialTerm gauss = term(ClassTag::vsE, Family::gaussian, 0.5, 1);
  const Grid2D g{96, 96, 6, 6};
  PacketSpec ps;
  ps.w = 0.25;
  const Field2D phi = make_packet(g, ps);
  PipelineOptions o;
  o.n_angles = 16;
  o.ds = 0.3;
  o.support_radius = 3;
  o.n_offsets = int(2 * (o.support_radius + 1.2) / o.ds) + 2;
  o.packet_radius = 1.0;
  o.image = Grid2D{128, 128, 12.8, 12.8};
  o.fbp.hann = false;
  o.scan.v_list = {32, 64, 128, 256};
  o.scan.sandwich.packet_radius = 1.5;
  std::vector<Vec2> centres;
  for (double x = -2; x <= 2 + 1e-9; x += 0.2)
    for (double y = -2; y <= 2 + 1e-9; y += 0.2)
      if (x * x + y * y <= 4 + 1e-9) centres.emplace_back(x, y);
  auto rel = [&](const std::vector<cplx>& e, const std::function<double(std::size_t)>& ref) {
    double num = 0, den = 0;
    for (std::size_t k = 0; k < centres.size(); ++k) {
      num += std::norm(e[k] - ref(k));
      den += ref(k) * ref(k);
    }
    return std::sqrt(num / den);
  };

  Scene tail;
  tail.sp = StarkParams{16.0, 1.0, 1.0};
  tail.V.vs = PairPotential({gauss});
  tail.V.s = PairPotential({term(ClassTag::sE, Family::power_tail, 0.2, 1, 0.75)});
  o.scan.quantity = ScanQuantity::vs_only;
  const PipelineResult a = recover_vs(phi, tail, centres, o);
  const double err = rel(a.estimate.value, [&](std::size_t k) { return gauss.value(centres[k]); });

  Scene bare = tail;
  bare.V.s = PairPotential{};
  const PipelineResult b = recover_vs(phi, bare, centres, o);
  o.scan.quantity = ScanQuantity::commutator;
  const PipelineResult c = pointwise_pipeline(phi, bare, centres, o);
  std::vector<double> cv(centres.size());
  for (std::size_t k = 0; k < centres.size(); ++k) cv[k] = c.estimate.value[k].real();
  const double cross = rel(b.estimate.value, [&](std::size_t k) { return cv[k]; });

  const bool pass = err <= 0.1 && cross <= 0.05;
  return {pass, fmt("rel L2 with tail %.4f (tol 0.1, %ld runs, %ld flagged, %.0f s); vs_only vs commutator without "
                    "tail %.4f (tol 0.05, %.0f s + %.0f s)",
                    err, a.samples_run, a.samples_flagged, a.wall_seconds, cross, b.wall_seconds, c.wall_seconds)};
}

// ---- 10: the plain sandwich does not converge for a zero-charge long-range pair
Outcome dollard_necessity() {
  Scene sc;
  sc.sp = StarkParams{8.0, 0.0, 1.0};
  sc.V = split(PairPotential({term(ClassTag::l0, Family::power_tail, 0.05, 1, 0.6)}));  // |grad V| ~ r^-1.6
  const Grid2D g{192, 192, 48, 48};
  PacketSpec ps;
  ps.w = 1;
  const Field2D phi = make_packet(g, ps);
  const double speed = 16;
  EvolutionPlan plan;
  plan.dt = 0.2 / speed;
  std::string detail;
  bool pass = true;
  for (bool dollard : {false, true}) {
    SandwichOptions so;
    so.T0 = 4;
    so.T_max = 32;
    so.record_all = true;
    so.dollard = dollard;
    so.packet_radius = 6;
    const ScatterRun r = apply_sandwich({phi}, sc, speed * direction(1.2), Vec2(0.5, 0.3), plan, so);
    detail += dollard ? "; Dollard" : "plain";
    for (const auto& s : r.cauchy) detail += fmt(" T=%g:%.3g", s.T, s.diff);
    if (r.T < 32) {
      pass = false;
      detail += " (stopped before T=32: " + r.stop_reason + ")";
    }
    if (!dollard) {
      for (const auto& s : r.cauchy) pass = pass && s.diff > 1e-2;
    } else {
      for (std::size_t i = 1; i < r.cauchy.size(); ++i) pass = pass && r.cauchy[i].diff < r.cauchy[i - 1].diff;
      pass = pass && !r.cauchy.empty() && r.cauchy.back().diff < 1e-4;
    }
  }
  return {pass, detail};
}

// ---- 11: moving a compact piece between the vs and s buckets --------------
Outcome splitting_independence() {
  ExperimentConfig c = reference_config();
  const Field2D phi = make_packet(c.grid, c.packet());
  const ScanOptions so = c.scan();
  const Vec2 vh = direction(c.probe_theta);
  cplx lim[2];
  std::string detail;
  bool ok = true;
  for (int k = 0; k < 2; ++k) {
    ExperimentConfig d = c;
    d.pairs[0].terms.push_back(
        term(k ? ClassTag::sE : ClassTag::vsE, Family::bump, 0.3, 2, 1, Vec2(1.0, -0.5)));
    const ScanResult r = hv_scan(phi, phi, c.probe_y, vh, d.scene(), so);
    lim[k] = r.limit;
    ok = ok && r.fit.ok;
  }
  const double diff = std::abs(lim[0] - lim[1]), tol = 2 * so.sandwich.tol;
  return {ok && diff <= tol, fmt("|limit(vs) - limit(s)| = %.3g (tol %.3g)", diff, tol)};
}

// ---- 12: exact rational kinematics ----------------------------------------
Outcome kinematics() {
  using R = Rational;
  int failed = 0, checks = 0;
  auto expect = [&](bool b) {
    ++checks;
    failed += !b;
  };
  expect(reduced_mass(R(1), R(1)) == R(1, 2));
  expect(reduced_mass(R(2, 3), R(5, 7)) == R(10, 29));
  expect(relative_charge(R(1), R(0), R(1), R(2)) == R(1));
  expect(relative_charge(R(3), R(1), R(6), R(2)) == R(0));
  expect(parse_rational("-7/21") == R(-1, 3));

  ParticleSystem<R> s;
  s.m = {R(1), R(2), R(3)};
  s.q = {R(1), R(-1), R(0)};
  const auto ch = jacobi_chain(s);
  expect(ch.nu[0] == R(2, 3));
  expect(ch.nu[1] == R(3 * 3, 3 + 3));  // (m1 + m2) m3 / M
  expect(ch.qR[0] == relative_charge(R(1), R(1), R(2), R(-1)));
  const auto cls = classify_pairs(s);
  expect(cls.nonzero.size() + cls.zero.size() == 3);

  // threshold v > mu12 / (m_i |d_j|): mu12 = 1/2, m1 = 1, |d3| = 1
  ParticleSystem<R> t;
  t.m = {R(1), R(1), R(1)};
  t.q = {R(0), R(0), R(0)};
  VecN<R> vh(2), d3(2);
  vh << R(3, 5), R(4, 5);
  d3 << R(1), R(0);
  expect(!check_velocity_config<R>(t, R(1, 2), vh, {d3}, R(0)).valid());
  expect(check_velocity_config<R>(t, R(1, 2) + R(1, 1000000), vh, {d3}, R(0)).valid());
  const auto vc = build_velocity_config<R>(t, R(10), vh, {d3}, R(0));
  expect(vc.relative(1, 2) == VecN<R>(vh * R(10)));
  return {failed == 0, fmt("%d of %d exact checks hold (see also unit_kinematics)", checks - failed, checks)};
}

const std::function<Outcome()> kCriteria[] = {avron_herbst, ehrenfest,      zero_identity,     radon,
                                              graf_rate,    oracle_agreement, rate_slope,       bump_pipeline,
                                              vs_pipeline,  dollard_necessity, splitting_independence, kinematics};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "all")
      for (int k = 1; k <= 12; ++k) which.push_back(k);
    else
      which.push_back(std::atoi(argv[i]));
  }
  if (which.empty()) {
    std::cerr << "usage: acceptance <1..12 | all>...\n";
    return 2;
  }
  int failures = 0;
  for (int n : which) {
    if (n < 1 || n > 12) {
      std::cerr << "no criterion " << n << "\n";
      return 2;
    }
    Outcome o;
    try {
      o = kCriteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d: %s %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
