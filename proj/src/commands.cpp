#include "hvscat/commands.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <ostream>
#include <random>

namespace hvs {

namespace {

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double x) { return fmt17(x); }
std::string yes(bool b) { return b ? "1" : "0"; }

struct Job {
  const RunContext& ctx;
  fs::path dir;
  Manifest man;

  Job(const RunContext& c, const std::string& name) : ctx(c) {
    dir = c.out.empty() ? fs::path(c.config.out_dir) : c.out;
    fs::create_directories(dir);
    man.command = name;
    man.config_hash = hex64(config_hash(c.config));
    man.workers = c.workers;
    man.seed = c.seed;
    std::ofstream(dir / "config.txt") << serialize_config(c.config);
    man.files.push_back("config.txt");
  }
  CsvWriter csv(const std::string& name, std::vector<std::string> header) {
    man.files.push_back(name);
    return CsvWriter(dir / name, std::move(header));
  }
  void grid(const std::string& name, const CArray& d, const Grid2D& g, const std::string& what) {
    write_grid(dir / name, d, g, what);
    man.files.push_back(name + ".bin");
    man.files.push_back(name + ".json");
  }
  void say(const std::string& s) const {
    if (ctx.log) *ctx.log << s << std::endl;
  }
  int finish(int status) {
    man.status = status;
    write_manifest(dir / "manifest.txt", man);
    return status;
  }
};

std::string joined(const std::vector<Violation>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x.subject + ": " + x.bound;
  return s;
}

int cmd_kinematics(Job& job) {
  const ExperimentConfig& c = job.ctx.config;
  const auto sys = c.system();
  auto pairs = job.csv("pairs.csv", {"j", "k", "mu", "q", "eta", "charged", "mu_double", "q_double"});
  for (const auto& f : pair_frames(sys))
    pairs.row({std::to_string(f.j), std::to_string(f.k), rational_to_string(f.mu), rational_to_string(f.q),
               rational_to_string(f.eta), yes(f.charged), num(to_double(f.mu)), num(to_double(f.q))});
  auto jac = job.csv("jacobi.csv", {"j", "nu", "q_reduced", "M", "Q"});
  const auto chain = jacobi_chain(sys);
  for (std::size_t j = 0; j < chain.nu.size(); ++j)
    jac.row({std::to_string(j + 1), rational_to_string(chain.nu[j]), rational_to_string(chain.qR[j]),
             rational_to_string(chain.M[j]), rational_to_string(chain.Q[j])});

  // velocity hypotheses for every configured speed along the probe direction
  const auto ds = to_double(sys);
  std::vector<VecN<double>> d;
  for (const auto& x : c.d) {
    VecN<double> v(2);
    v << to_double(x[0]), to_double(x[1]);
    d.push_back(v);
  }
  VecN<double> vh(2);
  vh << std::cos(c.probe_theta), std::sin(c.probe_theta);
  auto vel = job.csv("velocity.csv", {"v", "valid", "violations"});
  for (double v : c.v_list) {
    const auto cfg = check_velocity_config(ds, v, vh, d, to_double(c.delta));
    vel.row({num(v), yes(cfg.valid()), joined(cfg.violations)});
  }
  return 0;
}

int cmd_validate_potentials(Job& job) {
  const ExperimentConfig& c = job.ctx.config;
  auto out = job.csv("decay.csv", {"j", "k", "term", "class", "family", "bound", "R", "sup", "C", "local_exponent",
                                   "required", "admissible"});
  auto sum = job.csv("decay_summary.csv", {"j", "k", "term", "class", "passed", "flags"});
  bool ok = true;
  for (const auto& p : c.pairs)
    for (std::size_t t = 0; t < p.terms.size(); ++t) {
      const PotentialTerm& term = p.terms[t];
      const DecayReport r = validate_decay(term, c.decay, geometric_shells(1e4));
      for (const auto& row : r.rows)
        out.row({std::to_string(p.j), std::to_string(p.k), std::to_string(t + 1), to_string(term.cls),
                 to_string(term.family), row.bound, num(row.R), num(row.sup), num(row.C), num(row.local_exponent),
                 num(row.required), yes(row.admissible)});
      std::string flags;
      for (const auto& f : r.flags) flags += (flags.empty() ? "" : "; ") + f;
      sum.row({std::to_string(p.j), std::to_string(p.k), std::to_string(t + 1), to_string(term.cls), yes(r.passed()),
               flags});
      ok = ok && r.passed();
    }
  if (!ok) job.man.notes.push_back("at least one term failed its class bounds");
  return ok ? 0 : 2;
}

int cmd_propagate(Job& job) {
  const ExperimentConfig& c = job.ctx.config;
  const Scene sc = c.scene();
  const PairPotential V = sc.V.total();
  const Field2D f0 = make_packet(c.grid, c.packet());
  EvolutionPlan plan;
  plan.gauge = Gauge::lab;
  plan.dt = c.prop_dt;
  plan.T = c.prop_T;
  auto out = job.csv("trajectory.csv",
                     {"t", "x_mean", "y_mean", "x_classical", "y_classical", "norm", "rel_l2_vs_exact"});
  const int n_out = 20;
  Field2D f = f0;
  const Vec2 p0 = momentum_mean(f0), x0 = position_mean(f0);
  const auto t0 = Clock::now();
  for (int k = 0; k <= n_out; ++k) {
    const double t = c.prop_T * k / n_out;
    if (k) f = evolve(f, c.prop_T * (k - 1) / n_out, t, plan, V, sc.sp);
    const Vec2 m = position_mean(f), cl = x0 + p0 * t / sc.sp.mu + Vec2(sc.sp.half_accel() * t * t, 0);
    double rel = std::nan("");
    if (V.empty()) {
      const Field2D e = free_evolve_exact(f0, t, sc.sp);
      rel = std::sqrt((f.data - e.data).abs2().sum() / e.data.abs2().sum());
    }
    out.row({num(t), num(m(0)), num(m(1)), num(cl(0)), num(cl(1)), num(norm(f)), num(rel)});
  }
  job.man.timings.push_back({"evolve", since(t0)});
  job.grid("psi_final", f.data, f.grid, "lab-frame state at t = prop_T");
  return 0;
}

cplx oracle_value(const Field2D& phi, const Scene& sc, const Vec2& y, const Vec2& vh, const ExperimentConfig& c) {
  return c.quantity == ScanQuantity::commutator ? xray_rhs(phi, phi, y, vh, c.l, sc.V)
                                                : xray_potential(phi, phi, y, vh, sc.V.vs);
}

int cmd_scatter(Job& job) {
  const ExperimentConfig& c = job.ctx.config;
  const Scene sc = c.scene();
  const Field2D phi = make_packet(c.grid, c.packet());
  const ScanOptions so = c.scan();
  auto sd = job.csv("scatter.csv", {"probe", "theta", "y1", "y2", "v", "T", "converged", "cauchy", "norm_in",
                                    "norm_out", "overlap_re", "overlap_im", "identity_deviation", "steps", "seconds"});
  auto scan = job.csv("scan.csv", {"probe", "v", "value_re", "value_im", "raw_re", "raw_im", "graf_re", "graf_im",
                                   "correction_re", "correction_im", "converged", "cauchy", "T", "skipped", "note"});
  auto lim = job.csv("limits.csv", {"probe", "theta", "y1", "y2", "limit_re", "limit_im", "oracle_re", "oracle_im",
                                    "abs_diff", "rho", "residual", "flags"});
  const cplx base = inner(phi, phi);
  int flagged = 0;
  const auto pr = probes(c, job.ctx.seed);
  for (std::size_t k = 0; k < pr.size(); ++k) {
    const auto& [theta, y] = pr[k];
    const Vec2 vh = direction(theta);
    const std::string id = std::to_string(k);
    for (double v : c.v_list) {
      EvolutionPlan plan;
      plan.dt = so.dt_scale / v;
      const ScatterRun r = apply_sandwich({phi}, sc, v * vh, y, plan, so.sandwich);
      const cplx o = inner(r.out[0], phi);
      sd.row({id, num(theta), num(y(0)), num(y(1)), num(v), num(r.T), yes(r.converged), num(r.cauchy_diff()),
              num(r.norm_in), num(r.norm_out), num(o.real()), num(o.imag()), num(std::abs(o - base)),
              num(double(r.steps)), num(r.wall_seconds)});
    }
    const auto t0 = Clock::now();
    const ScanResult s = hv_scan(phi, phi, y, vh, sc, so);
    job.man.timings.push_back({"scan_probe_" + id, since(t0)});
    for (const auto& p : s.points)
      scan.row({id, num(p.v), num(p.value.real()), num(p.value.imag()), num(p.raw.real()), num(p.raw.imag()),
                num(p.graf.real()), num(p.graf.imag()), num(p.correction.real()), num(p.correction.imag()),
                yes(p.converged), num(p.cauchy), num(p.T), yes(p.skipped), p.note});
    const cplx ox = oracle_value(phi, sc, y, vh, c);
    std::string flags;
    for (const auto& f : s.flags) flags += (flags.empty() ? "" : "; ") + f;
    flagged += s.flagged();
    lim.row({id, num(theta), num(y(0)), num(y(1)), num(s.limit.real()), num(s.limit.imag()), num(ox.real()),
             num(ox.imag()), num(std::abs(s.limit - ox)), num(s.rho), num(s.residual), flags});
    job.say("probe " + id + ": limit " + fmt_g(s.limit.real()) + " oracle " + fmt_g(ox.real()));
  }
  if (flagged) job.man.notes.push_back(std::to_string(flagged) + " probe(s) flagged");
  return 0;
}

int pipeline_command(Job& job, bool vs_only) {
  const ExperimentConfig& c = job.ctx.config;
  const Scene sc = c.scene();
  const Field2D phi = make_packet(c.grid, c.packet());
  PipelineOptions o = c.pipeline();
  o.workers = job.ctx.workers;
  if (job.ctx.log)
    o.progress = [&job](int d, int n) {
      if (d % 50 == 0 || d == n) job.say("sample " + std::to_string(d) + " / " + std::to_string(n));
    };
  const std::vector<Vec2> centres = c.centres();
  const PipelineResult r = vs_only ? recover_vs(phi, sc, centres, o) : pointwise_pipeline(phi, sc, centres, o);
  job.man.timings.push_back({"pipeline", r.wall_seconds});

  auto sino = job.csv("sinogram.csv", {"theta", "s", "value_re", "value_im", "v_max", "rho", "residual", "flag"});
  const int ns = int(r.sinogram.s.size());
  for (std::size_t k = 0; k < r.sinogram.meta.size(); ++k) {
    const auto& m = r.sinogram.meta[k];
    sino.row({num(r.sinogram.theta[k / ns]), num(r.sinogram.s[k % ns]), num(m.value.real()), num(m.value.imag()),
              num(m.v_max), num(m.rho), num(m.residual), m.flag});
  }
  job.grid(vs_only ? "image_h" : "image_f", r.image.image, r.image.grid, "filtered back-projection of the sinogram");
  const PairPotential truth = vs_only ? sc.V.vs : sc.V.total();
  auto est = job.csv("estimate.csv", {"x", "y", "estimate_re", "estimate_im", "true", "skipped"});
  double num2 = 0, den2 = 0, mx = 0, peak = 0;
  for (std::size_t k = 0; k < centres.size(); ++k) {
    const double t = truth.value(centres[k]);
    const cplx e = r.estimate.value[k];
    est.row({num(centres[k](0)), num(centres[k](1)), num(e.real()), num(e.imag()), num(t),
             yes(r.estimate.skipped[k])});
    num2 += std::norm(e - t);
    den2 += t * t;
    mx = std::max(mx, std::abs(e - t));
    peak = std::max(peak, std::abs(t));
  }
  auto sum = job.csv("summary.csv", {"samples_run", "samples_local_zero", "samples_flagged", "rel_l2", "max_abs_error",
                                     "peak", "smear_width", "seconds", "warnings"});
  std::string warn;
  for (const auto& w : r.image.warnings) warn += (warn.empty() ? "" : "; ") + w;
  sum.row({num(double(r.samples_run)), num(double(r.samples_local_zero)), num(double(r.samples_flagged)),
           num(den2 > 0 ? std::sqrt(num2 / den2) : 0.0), num(mx), num(peak), num(r.estimate.smear_width),
           num(r.wall_seconds), warn});
  for (const auto& w : r.image.warnings) job.man.notes.push_back(w);
  return 0;
}

int cmd_rates(Job& job) {
  const ExperimentConfig& c = job.ctx.config;
  const RateScene rs = rate_scene(c);
  const RatePrediction p = predict_exponent(rs);
  auto pairs = job.csv("rates_pairs.csv", {"j", "k", "zeta", "theta", "sigma_tilde", "sigma"});
  for (const auto& x : p.pairs)
    pairs.row({std::to_string(x.j), std::to_string(x.k), x.zeta, num(x.theta), num(x.sigma_tilde), num(x.sigma)});
  auto viol = job.csv("rates_violations.csv", {"subject", "bound", "detail"});
  for (const auto& v : p.violations) viol.row({v.subject, v.bound, v.detail});

  auto out = job.csv("rates.csv", {"scene", "quantity", "case", "case_label", "predicted_exponent", "open_bound",
                                   "fitted_exponent", "half_width", "band", "pass"});
  const std::string id = job.man.config_hash;

  // Graf phase decay, pure quadrature
  if (p.has_graf) {
    const Scene sc = c.scene();
    std::vector<double> vs, err;
    for (double v = 4; v <= 256; v *= 2) {
      vs.push_back(v);
      err.push_back(std::abs(graf_phase(v * direction(c.probe_theta), sc.sp, sc.V.s) - 1.0));
    }
    const RateFit f = fit_rate(vs, err);
    const bool pass = std::abs(f.exponent - p.graf_exponent) <= c.rate_band;
    out.row({id, "graf", "", p.graf_case, num(p.graf_exponent), "0", num(f.exponent), num(f.half_width),
             num(c.rate_band), yes(pass)});
  }
  out.row({id, "wave_operator", "", p.wave_case, num(p.wave_exponent), "0", "", "", num(c.rate_band), ""});

  std::string fitted, hw, pass;
  const Scene sc = c.scene();
  if (c.v_list.size() >= 4 && !sc.V.total().empty()) {
    const Field2D phi = make_packet(c.grid, c.packet());
    ScanOptions so = c.scan();
    so.quantity = ScanQuantity::commutator;
    const auto t0 = Clock::now();
    const RateMeasurement m = measure_commutator_rate(phi, sc, c.probe_y, direction(c.probe_theta), so);
    job.man.timings.push_back({"rate_scan", since(t0)});
    auto e = job.csv("rate_errors.csv", {"v", "error"});
    for (std::size_t i = 0; i < m.v.size(); ++i) e.row({num(m.v[i]), num(m.error[i])});
    if (m.fitted) {
      fitted = num(m.fit.exponent);
      hw = num(m.fit.half_width);
      pass = yes(std::abs(m.fit.exponent - p.exponent) <= c.rate_band);
    }
  }
  out.row({id, "commutator", std::to_string(p.case_index), p.case_label, num(p.exponent), yes(p.open_bound), fitted, hw,
           num(c.rate_band), pass});
  return p.admissible() ? 0 : 2;
}

int cmd_radon_selftest(Job& job) {
  const PhantomReport r = radon_selftest(180, 256, 0.02);
  auto out = job.csv("radon_selftest.csv", {"angles", "offsets", "rel_l2", "tol", "passed", "seconds"});
  out.row({"180", "256", num(r.rel_l2), num(0.02), yes(r.passed), num(r.seconds)});
  job.man.timings.push_back({"selftest", r.seconds});
  job.say(std::string("phantom relative L2 ") + fmt_g(r.rel_l2) + (r.passed ? " PASS" : " FAIL"));
  return r.passed ? 0 : 1;
}

const std::map<std::string, std::function<int(Job&)>>& table() {
  static const std::map<std::string, std::function<int(Job&)>> t = {
      {"kinematics", cmd_kinematics},
      {"validate-potentials", cmd_validate_potentials},
      {"propagate", cmd_propagate},
      {"scatter", cmd_scatter},
      {"reconstruct", [](Job& j) { return pipeline_command(j, false); }},
      {"recover-vs", [](Job& j) { return pipeline_command(j, true); }},
      {"rates", cmd_rates},
      {"radon-selftest", cmd_radon_selftest},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> n = {"kinematics", "validate-potentials", "propagate", "scatter",
                                             "reconstruct", "recover-vs", "rates", "radon-selftest"};
  return n;
}

int run_command(const std::string& name, const RunContext& ctx) {
  const auto it = table().find(name);
  if (it == table().end()) throw DomainError("unknown command '" + name + "'");
  Job job(ctx, name);
  const auto t0 = Clock::now();
  int status = 0;
  try {
    status = it->second(job);
  } catch (const Error& e) {
    job.man.notes.push_back(std::string("error: ") + e.what());
    job.man.timings.push_back({"total", since(t0)});
    job.finish(1);
    throw;
  }
  job.man.timings.push_back({"total", since(t0)});
  return job.finish(status);
}

RateMeasurement measure_commutator_rate(const Field2D& phi, const Scene& scene, const Vec2& y, const Vec2& vhat,
                                        const ScanOptions& opt) {
  RateMeasurement m;
  m.oracle = opt.quantity == ScanQuantity::commutator ? xray_rhs(phi, phi, y, vhat, opt.l, scene.V)
                                                      : xray_potential(phi, phi, y, vhat, scene.V.vs);
  m.scan = hv_scan(phi, phi, y, vhat, scene, opt);
  for (const auto& p : m.scan.points) {
    if (p.skipped) continue;
    m.v.push_back(p.v);
    // left-hand side of the rate statement, before the division by I_G
    const cplx lhs = opt.quantity == ScanQuantity::commutator ? p.raw : p.raw - p.graf * p.correction;
    m.error.push_back(std::abs(lhs - m.oracle));
  }
  bool positive = m.v.size() >= 4;
  for (double e : m.error) positive = positive && e > 0;
  if (positive) {
    m.fit = fit_rate(m.v, m.error);
    m.fitted = true;
  }
  return m;
}

RateScene rate_scene(const ExperimentConfig& c) {
  RateScene s;
  s.params = c.decay;
  s.margin = c.rate_margin;
  const auto frames = pair_frames(c.system());
  for (const auto& f : frames) {
    PairRateInput p;
    p.j = f.j;
    p.k = f.k;
    p.charged = f.charged;
    for (const auto& b : c.pairs)
      if (b.j == f.j && b.k == f.k)
        for (const auto& t : b.terms) {
          p.has_short = p.has_short || t.cls == ClassTag::sE;
          p.has_long = p.has_long || t.cls == ClassTag::lE || t.cls == ClassTag::l0;
        }
    s.pairs.push_back(p);
  }
  return s;
}

std::vector<std::pair<double, Vec2>> probes(const ExperimentConfig& c, unsigned long long seed) {
  std::vector<std::pair<double, Vec2>> out{{c.probe_theta, c.probe_y}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> th(0.05 * M_PI, 0.95 * M_PI), s(-c.centre_radius, c.centre_radius);
  for (int k = 0; k < c.random_probes; ++k) {
    const double t = th(rng);
    out.push_back({t, s(rng) * normal(t)});
  }
  return out;
}

}  // namespace hvs
