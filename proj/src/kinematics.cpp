#include "hvscat/kinematics.hpp"

#include <cctype>
#include <sstream>

namespace hvs {

namespace {

boost::multiprecision::cpp_int pow10(int e) {
  boost::multiprecision::cpp_int r = 1;
  for (int i = 0; i < e; ++i) r *= 10;
  return r;
}

Rational parse_decimal(const std::string& s) {
  std::size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  boost::multiprecision::cpp_int mant = 0;
  int frac = 0, digits = 0;
  bool dot = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      mant = mant * 10 + (c - '0');
      ++digits;
      if (dot) ++frac;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (digits == 0) throw DomainError("not a number: '" + s + "'");
  long exp = 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    std::size_t used = 0;
    try {
      exp = std::stol(s.substr(i), &used);
    } catch (const std::exception&) {
      throw DomainError("bad exponent: '" + s + "'");
    }
    i += used;
  }
  if (i != s.size()) throw DomainError("not a number: '" + s + "'");
  exp -= frac;
  if (exp > 4000 || exp < -4000) throw DomainError("exponent out of range: '" + s + "'");
  Rational r = exp >= 0 ? Rational(mant * pow10(static_cast<int>(exp))) : Rational(mant, pow10(static_cast<int>(-exp)));
  return neg ? Rational(-r) : r;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

Rational parse_rational(const std::string& text) {
  const std::string s = trim(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_decimal(s);
  const Rational num = parse_decimal(trim(s.substr(0, slash)));
  const Rational den = parse_decimal(trim(s.substr(slash + 1)));
  if (den == 0) throw DomainError("zero denominator: '" + s + "'");
  return num / den;
}

std::string rational_to_string(const Rational& x) {
  std::ostringstream os;
  os << numerator(x);
  if (denominator(x) != 1) os << "/" << denominator(x);
  return os.str();
}

ParticleSystem<double> to_double(const ParticleSystem<Rational>& s) {
  ParticleSystem<double> d;
  d.n = s.n;
  for (const auto& x : s.m) d.m.push_back(to_double(x));
  for (const auto& x : s.q) d.q.push_back(to_double(x));
  d.E = to_double(s.E);
  d.eta = to_double(s.eta);
  return d;
}

}  // namespace hvs
