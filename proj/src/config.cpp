#include "hvscat/config.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace hvs {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

double to_num(const std::string& s) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(s, &pos);
  } catch (...) {
    throw DomainError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw DomainError("not a number: '" + s + "'");
  return x;
}

int to_int(const std::string& s) {
  const double x = to_num(s);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw DomainError("not an integer: '" + s + "'");
  return int(x);
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw DomainError("not a boolean: '" + s + "'");
}

Vec2 to_vec(const std::string& s) {
  std::string t = s;
  for (char& c : t)
    if (c == ',') c = ' ';
  const auto w = words(t);
  if (w.size() != 2) throw DomainError("expected two components: '" + s + "'");
  return Vec2(to_num(w[0]), to_num(w[1]));
}

std::string vec_str(const Vec2& v) { return fmt17(v(0)) + " " + fmt17(v(1)); }

ScanQuantity parse_quantity(const std::string& s) {
  if (s == "commutator") return ScanQuantity::commutator;
  if (s == "vs_only") return ScanQuantity::vs_only;
  throw DomainError("unknown quantity '" + s + "'");
}
std::string to_string(ScanQuantity q) { return q == ScanQuantity::commutator ? "commutator" : "vs_only"; }

Envelope parse_envelope(const std::string& s) {
  if (s == "gaussian") return Envelope::gaussian;
  if (s == "bump") return Envelope::bump;
  throw DomainError("unknown envelope '" + s + "'");
}
std::string to_string(Envelope e) { return e == Envelope::gaussian ? "gaussian" : "bump"; }

PotentialTerm parse_term(const std::string& s) {
  PotentialTerm t;
  std::set<std::string> seen;
  for (const auto& w : words(s)) {
    const auto eq = w.find('=');
    if (eq == std::string::npos) throw DomainError("term field without '=': '" + w + "'");
    const std::string k = w.substr(0, eq), v = w.substr(eq + 1);
    if (!seen.insert(k).second) throw DomainError("term field repeated: '" + k + "'");
    if (k == "class")
      t.cls = parse_class_tag(v);
    else if (k == "family")
      t.family = parse_family(v);
    else if (k == "amplitude")
      t.amplitude = to_num(v);
    else if (k == "width")
      t.width = to_num(v);
    else if (k == "exponent")
      t.exponent = to_num(v);
    else if (k == "center")
      t.center = to_vec(v);
    else
      throw DomainError("unknown term field '" + k + "'");
  }
  if (!seen.count("class")) throw DomainError("term needs class=");
  return t;
}

std::string term_str(const PotentialTerm& t) {
  return "class=" + to_string(t.cls) + " family=" + to_string(t.family) + " amplitude=" + fmt17(t.amplitude) +
         " width=" + fmt17(t.width) + " exponent=" + fmt17(t.exponent) + " center=" + fmt17(t.center(0)) + "," +
         fmt17(t.center(1));
}

template <class T, class F>
std::vector<T> list_of(const std::string& s, F conv) {
  std::vector<T> out;
  for (const auto& w : words(s)) out.push_back(conv(w));
  return out;
}

std::string rational_list(const std::vector<Rational>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + rational_to_string(v[i]);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

/// Key table per section; also drives serialization order.
struct Key {
  std::string name;
  std::string comment;
  Setter set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define HVS_NUM(field, cmt) \
  Key { #field, cmt, [](ExperimentConfig& c, const std::string& v) { c.field = to_num(v); }, \
        [](const ExperimentConfig& c) { return fmt17(c.field); } }
#define HVS_INT(field, cmt) \
  Key { #field, cmt, [](ExperimentConfig& c, const std::string& v) { c.field = to_int(v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.field); } }
#define HVS_BOOL(field, cmt) \
  Key { #field, cmt, [](ExperimentConfig& c, const std::string& v) { c.field = to_bool(v); }, \
        [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); } }
#define HVS_VEC(field, cmt) \
  Key { #field, cmt, [](ExperimentConfig& c, const std::string& v) { c.field = to_vec(v); }, \
        [](const ExperimentConfig& c) { return vec_str(c.field); } }

const std::vector<std::pair<std::string, std::vector<Key>>>& sections() {
  static const std::vector<std::pair<std::string, std::vector<Key>>> table = {
      {"system",
       {
           {"masses", "particle masses, exact rationals",
            [](ExperimentConfig& c, const std::string& v) { c.masses = list_of<Rational>(v, parse_rational); },
            [](const ExperimentConfig& c) { return rational_list(c.masses); }},
           {"charges", "particle charges, exact rationals",
            [](ExperimentConfig& c, const std::string& v) { c.charges = list_of<Rational>(v, parse_rational); },
            [](const ExperimentConfig& c) { return rational_list(c.charges); }},
           {"E", "field strength along e1",
            [](ExperimentConfig& c, const std::string& v) { c.E = parse_rational(v); },
            [](const ExperimentConfig& c) { return rational_to_string(c.E); }},
           {"eta", "pair (1,2) threshold constant",
            [](ExperimentConfig& c, const std::string& v) { c.eta = parse_rational(v); },
            [](const ExperimentConfig& c) { return rational_to_string(c.eta); }},
           {"delta", "angular bound |vhat_jk . e1| <= delta for charged pairs",
            [](ExperimentConfig& c, const std::string& v) { c.delta = parse_rational(v); },
            [](const ExperimentConfig& c) { return rational_to_string(c.delta); }},
           {"d", "directions d_j for j >= 3, as 'x,y x,y ...'",
            [](ExperimentConfig& c, const std::string& v) {
              c.d.clear();
              for (const auto& w : words(v)) {
                const auto comma = w.find(',');
                if (comma == std::string::npos) throw DomainError("d_j needs 'x,y': '" + w + "'");
                c.d.push_back({parse_rational(w.substr(0, comma)), parse_rational(w.substr(comma + 1))});
              }
            },
            [](const ExperimentConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.d.size(); ++i)
                s += (i ? " " : "") + rational_to_string(c.d[i][0]) + "," + rational_to_string(c.d[i][1]);
              return s;
            }},
       }},
      {"decay",
       {
           Key{"gamma1", "zero-charge long-range decay", [](ExperimentConfig& c, const std::string& v) { c.decay.gamma1 = to_num(v); },
               [](const ExperimentConfig& c) { return fmt17(c.decay.gamma1); }},
           Key{"eps0", "very-short-range excess decay", [](ExperimentConfig& c, const std::string& v) { c.decay.eps0 = to_num(v); },
               [](const ExperimentConfig& c) { return fmt17(c.decay.eps0); }},
           Key{"gamma", "short-range decay", [](ExperimentConfig& c, const std::string& v) { c.decay.gamma = to_num(v); },
               [](const ExperimentConfig& c) { return fmt17(c.decay.gamma); }},
           Key{"alpha", "short-range derivative decay", [](ExperimentConfig& c, const std::string& v) { c.decay.alpha = to_num(v); },
               [](const ExperimentConfig& c) { return fmt17(c.decay.alpha); }},
           Key{"gammaD", "charged long-range decay", [](ExperimentConfig& c, const std::string& v) { c.decay.gammaD = to_num(v); },
               [](const ExperimentConfig& c) { return fmt17(c.decay.gammaD); }},
           Key{"mu", "charged long-range derivative gain", [](ExperimentConfig& c, const std::string& v) { c.decay.mu = to_num(v); },
               [](const ExperimentConfig& c) { return fmt17(c.decay.mu); }},
           Key{"rho", "very-short-range weight", [](ExperimentConfig& c, const std::string& v) { c.decay.rho = to_num(v); },
               [](const ExperimentConfig& c) { return fmt17(c.decay.rho); }},
       }},
      {"grid",
       {
           Key{"nx", "points along x", [](ExperimentConfig& c, const std::string& v) { c.grid.nx = to_int(v); },
               [](const ExperimentConfig& c) { return std::to_string(c.grid.nx); }},
           Key{"ny", "points along y", [](ExperimentConfig& c, const std::string& v) { c.grid.ny = to_int(v); },
               [](const ExperimentConfig& c) { return std::to_string(c.grid.ny); }},
           Key{"lx", "box length, length units", [](ExperimentConfig& c, const std::string& v) { c.grid.lx = to_num(v); },
               [](const ExperimentConfig& c) { return fmt17(c.grid.lx); }},
           Key{"ly", "box length, length units", [](ExperimentConfig& c, const std::string& v) { c.grid.ly = to_num(v); },
               [](const ExperimentConfig& c) { return fmt17(c.grid.ly); }},
           Key{"origin", "box centre", [](ExperimentConfig& c, const std::string& v) { c.grid.origin = to_vec(v); },
               [](const ExperimentConfig& c) { return vec_str(c.grid.origin); }},
       }},
      {"evolution",
       {
           HVS_NUM(dt_scale, "scan time step times v"),
           HVS_NUM(T0, "first sandwich half-duration, 0 = automatic"),
           HVS_NUM(T_max, "largest sandwich half-duration"),
           HVS_NUM(tol, "relative Cauchy tolerance of the sandwich"),
           HVS_NUM(margin_tol, "allowed relative mass in the boundary strip"),
           HVS_BOOL(dollard, "use the Dollard modifier"),
           HVS_NUM(packet_radius, "packet reach, 0 = from the density"),
           HVS_NUM(correction_tol, "absolute tolerance of the correction element"),
           HVS_NUM(prop_dt, "time step of `propagate`"),
           HVS_NUM(prop_T, "final time of `propagate`"),
       }},
      {"experiment",
       {
           Key{"v_list", "speeds, increasing",
               [](ExperimentConfig& c, const std::string& v) { c.v_list = list_of<double>(v, to_num); },
               [](const ExperimentConfig& c) {
                 std::string s;
                 for (std::size_t i = 0; i < c.v_list.size(); ++i) s += (i ? " " : "") + fmt17(c.v_list[i]);
                 return s;
               }},
           HVS_INT(l, "momentum component of the commutator, 1 or 2"),
           Key{"quantity", "commutator or vs_only",
               [](ExperimentConfig& c, const std::string& v) { c.quantity = parse_quantity(v); },
               [](const ExperimentConfig& c) { return to_string(c.quantity); }},
           Key{"envelope", "gaussian or bump",
               [](ExperimentConfig& c, const std::string& v) { c.envelope = parse_envelope(v); },
               [](const ExperimentConfig& c) { return to_string(c.envelope); }},
           HVS_NUM(packet_w, "packet width"),
           HVS_VEC(packet_x0, "packet centre"),
           HVS_VEC(packet_p0, "packet mean momentum"),
           HVS_NUM(probe_theta, "probe direction angle, radians"),
           HVS_VEC(probe_y, "probe translation"),
           HVS_INT(random_probes, "additional probes drawn from --seed"),
           HVS_INT(n_angles, "sinogram angles"),
           HVS_INT(n_offsets, "sinogram offsets"),
           HVS_NUM(ds, "offset spacing"),
           HVS_NUM(support_radius, "a priori support bound of the unknown potential, 0 = none"),
           HVS_BOOL(hann, "Hann apodization of the ramp filter"),
           HVS_INT(image_n, "reconstruction image points per axis"),
           HVS_NUM(image_l, "reconstruction image box length"),
           HVS_NUM(centre_radius, "pointwise estimates inside this disc"),
           HVS_NUM(centre_step, "spacing of the pointwise estimates"),
           HVS_NUM(rate_margin, "margin for open suprema in rate predictions"),
           HVS_NUM(rate_band, "slope acceptance band"),
       }},
      {"output",
       {
           Key{"dir", "output directory", [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; },
               [](const ExperimentConfig& c) { return c.out_dir; }},
       }},
  };
  return table;
}

#undef HVS_NUM
#undef HVS_INT
#undef HVS_BOOL
#undef HVS_VEC

}  // namespace

ParticleSystem<Rational> ExperimentConfig::system() const {
  ParticleSystem<Rational> s;
  s.n = 2;
  s.m = masses;
  s.q = charges;
  s.E = E;
  s.eta = eta;
  return s;
}

Scene ExperimentConfig::scene() const {
  Scene s;
  if (masses.size() < 2 || charges.size() < 2) throw DomainError("config: need at least two particles");
  const Rational mu = reduced_mass(masses[0], masses[1]);
  const Rational q = relative_charge(masses[0], charges[0], masses[1], charges[1]);
  s.sp = StarkParams{to_double(mu), to_double(q), to_double(E)};
  for (const auto& p : pairs)
    if (p.j == 1 && p.k == 2) s.V = split(PairPotential(p.terms));
  return s;
}

PacketSpec ExperimentConfig::packet() const {
  PacketSpec p;
  p.envelope = envelope;
  p.w = packet_w;
  p.x0 = packet_x0;
  p.p0 = packet_p0;
  return p;
}

ScanOptions ExperimentConfig::scan() const {
  ScanOptions o;
  o.v_list = v_list;
  o.quantity = quantity;
  o.l = l;
  o.dt_scale = dt_scale;
  o.correction_tol = correction_tol;
  o.sandwich.T0 = T0;
  o.sandwich.T_max = T_max;
  o.sandwich.tol = tol;
  o.sandwich.margin_tol = margin_tol;
  o.sandwich.dollard = dollard;
  o.sandwich.packet_radius = packet_radius > 0 ? packet_radius : 6 * packet_w;
  return o;
}

PipelineOptions ExperimentConfig::pipeline() const {
  PipelineOptions o;
  o.n_angles = n_angles;
  o.n_offsets = n_offsets;
  o.ds = ds;
  o.scan = scan();
  o.image = Grid2D{image_n, image_n, image_l, image_l};
  o.fbp.hann = hann;
  o.packet_radius = packet_radius;
  o.support_radius = support_radius;
  return o;
}

std::vector<Vec2> ExperimentConfig::centres() const {
  std::vector<Vec2> out;
  if (!(centre_step > 0)) return out;
  const int n = int(std::floor(centre_radius / centre_step + 1e-9));
  for (int j = -n; j <= n; ++j)
    for (int i = -n; i <= n; ++i) {
      const Vec2 x(i * centre_step, j * centre_step);
      if (x.norm() <= centre_radius + 1e-12) out.push_back(x);
    }
  return out;
}

std::vector<Violation> validate_config(const ExperimentConfig& c) {
  std::vector<Violation> bad;
  const ParticleSystem<Rational> sys = c.system();
  try {
    sys.validate();
  } catch (const Rejection& r) {
    bad.insert(bad.end(), r.violations.begin(), r.violations.end());
  }
  const int N = int(c.masses.size());
  if (!(c.delta >= 0) || !(c.delta < 1)) bad.push_back({"delta", "0 <= delta < 1", ""});
  if (int(c.d.size()) != std::max(0, N - 2)) bad.push_back({"d", "one d_j per particle j >= 3", ""});
  for (std::size_t a = 0; a < c.d.size(); ++a) {
    const std::string name = "d" + std::to_string(a + 3);
    if (c.d[a][0] == 0 && c.d[a][1] == 0) bad.push_back({name, "d_j != 0", ""});
    for (std::size_t b = a + 1; b < c.d.size(); ++b)
      if (c.d[a] == c.d[b])
        bad.push_back({"(" + std::to_string(a + 3) + "," + std::to_string(b + 3) + ")", "d_j - d_k != 0", "distinctness"});
  }

  std::set<std::pair<int, int>> seen;
  for (const auto& p : c.pairs) {
    const std::string name = "pair (" + std::to_string(p.j) + "," + std::to_string(p.k) + ")";
    if (!(1 <= p.j && p.j < p.k && p.k <= N)) {
      bad.push_back({name, "1 <= j < k <= N", "pair does not exist"});
      continue;
    }
    if (!seen.insert({p.j, p.k}).second) bad.push_back({name, "one block per pair", ""});
    const Rational &mj = c.masses[p.j - 1], &mk = c.masses[p.k - 1];
    if (int(c.charges.size()) != N || !(mj > 0) || !(mk > 0)) continue;  // already reported
    const bool charged = relative_charge(mj, c.charges[p.j - 1], mk, c.charges[p.k - 1]) != 0;
    for (std::size_t t = 0; t < p.terms.size(); ++t) {
      const PotentialTerm& term = p.terms[t];
      const std::string who = name + " term " + std::to_string(t + 1);
      if (charged_class(term.cls) != charged)
        bad.push_back({who, charged ? "q_jk != 0 needs class vsE, sE or lE" : "q_jk = 0 needs class vs0 or l0",
                       "class " + to_string(term.cls)});
      if (!(term.width > 0)) bad.push_back({who, "width > 0", ""});
      if (!std::isfinite(term.amplitude)) bad.push_back({who, "finite amplitude", ""});
      for (auto v : c.decay.check(term.cls)) {
        v.subject = who + (v.subject.empty() ? "" : " " + v.subject);
        bad.push_back(v);
      }
    }
  }

  try {
    c.grid.validate();
  } catch (const Error& e) {
    bad.push_back({"grid", "valid grid", e.what()});
  }
  if (c.v_list.empty()) bad.push_back({"v_list", "at least one speed", ""});
  for (std::size_t i = 0; i < c.v_list.size(); ++i) {
    if (!(c.v_list[i] > 0)) bad.push_back({"v_list", "v > 0", fmt_g(c.v_list[i])});
    if (i && !(c.v_list[i] > c.v_list[i - 1])) bad.push_back({"v_list", "increasing", ""});
  }
  if (c.l != 1 && c.l != 2) bad.push_back({"l", "l in {1, 2}", ""});
  if (!(c.packet_w > 0)) bad.push_back({"packet_w", "w > 0", ""});
  if (!(c.dt_scale > 0)) bad.push_back({"dt_scale", "dt_scale > 0", ""});
  if (!(c.tol > 0)) bad.push_back({"tol", "tol > 0", ""});
  if (!(c.T_max > 0)) bad.push_back({"T_max", "T_max > 0", ""});
  if (c.n_angles < 1) bad.push_back({"n_angles", "n_angles >= 1", ""});
  if (c.n_offsets < 2) bad.push_back({"n_offsets", "n_offsets >= 2", ""});
  if (!(c.ds > 0)) bad.push_back({"ds", "ds > 0", ""});
  if (c.image_n < 16 || c.image_n % 2) bad.push_back({"image_n", "even and >= 16", ""});
  if (!(c.image_l > 0)) bad.push_back({"image_l", "image_l > 0", ""});
  if (c.random_probes < 0) bad.push_back({"random_probes", "random_probes >= 0", ""});
  if (!(c.prop_dt > 0)) bad.push_back({"prop_dt", "prop_dt > 0", ""});
  return bad;
}

ParseResult parse_config(const std::string& text, const ParseOptions& opt) {
  ParseResult r;
  ExperimentConfig& c = r.config;
  std::vector<Violation> bad;
  std::map<std::string, const Key*> keys;
  std::string section;
  PairBlock* pair = nullptr;
  std::set<std::string> assigned;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    std::string line = raw;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        bad.push_back({where, "section header '[name]'", line});
        continue;
      }
      const auto w = words(line.substr(1, line.size() - 2));
      pair = nullptr;
      keys.clear();
      section = w.empty() ? "" : w[0];
      if (section == "pair") {
        try {
          if (w.size() != 3) throw DomainError("expected '[pair j k]'");
          c.pairs.push_back({to_int(w[1]), to_int(w[2]), {}});
          pair = &c.pairs.back();
        } catch (const Error& e) {
          bad.push_back({where, "pair header", e.what()});
          section = "";
        }
        continue;
      }
      bool known = false;
      for (const auto& [name, ks] : sections())
        if (name == section) {
          known = true;
          for (const auto& k : ks) keys[k.name] = &k;
        }
      if (!known) {
        if (opt.strict)
          bad.push_back({where, "known section", "[" + section + "]"});
        else
          r.warnings.push_back(where + ": unknown section [" + section + "] ignored");
        section = "";
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bad.push_back({where, "'key = value'", line});
      continue;
    }
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (section.empty()) {
      if (opt.strict) bad.push_back({where, "key inside a known section", key});
      continue;
    }
    try {
      if (pair) {
        if (key != "term") throw DomainError("unknown key '" + key + "' in pair block");
        pair->terms.push_back(parse_term(value));
        continue;
      }
      const auto it = keys.find(key);
      if (it == keys.end()) {
        if (opt.strict)
          bad.push_back({where, "known key", "[" + section + "] " + key});
        else
          r.warnings.push_back(where + ": unknown key '" + key + "' ignored");
        continue;
      }
      if (!assigned.insert(section + "." + key).second) throw DomainError("key '" + key + "' given twice");
      it->second->set(c, value);
    } catch (const Error& e) {
      bad.push_back({where, "valid value for " + key, e.what()});
    } catch (const std::exception& e) {
      bad.push_back({where, "valid value for " + key, e.what()});
    }
  }

  if (bad.empty()) bad = validate_config(c);
  if (!bad.empty()) throw Rejection(std::move(bad));
  return r;
}

std::string serialize_config(const ExperimentConfig& c, bool with_output) {
  std::ostringstream os;
  for (const auto& [name, ks] : sections()) {
    if (name == "output" && !with_output) continue;
    os << "[" << name << "]\n";
    for (const auto& k : ks) os << k.name << " = " << k.get(c) << "  # " << k.comment << "\n";
    os << "\n";
    if (name == "decay")
      for (const auto& p : c.pairs) {
        os << "[pair " << p.j << " " << p.k << "]\n";
        for (const auto& t : p.terms) os << "term = " << term_str(t) << "\n";
        os << "\n";
      }
  }
  return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_config(c, false)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace hvs
