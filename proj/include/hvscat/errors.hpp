#ifndef HVSCAT_ERRORS_HPP
#define HVSCAT_ERRORS_HPP

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error { using Error::Error; };
class ClassificationError : public Error { using Error::Error; };
class ResolutionError : public Error { using Error::Error; };
class GeometryError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class ToleranceError : public Error { using Error::Error; };

/// Short %g rendering for messages.
inline std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

/// One violated hypothesis, e.g. a kinematic threshold or a decay bound.
struct Violation {
  std::string subject;   // pair, term or key the violation is about
  std::string bound;     // the inequality, as text
  std::string detail;
};

/// Carries every violation found, not only the first.
class Rejection : public Error {
 public:
  explicit Rejection(std::vector<Violation> v)
      : Error(summarize(v)), violations(std::move(v)) {}
  std::vector<Violation> violations;

 private:
  static std::string summarize(const std::vector<Violation>& v) {
    std::string s = "rejected:";
    for (const auto& x : v) s += " [" + x.subject + ": " + x.bound + (x.detail.empty() ? "" : " (" + x.detail + ")") + "]";
    return s;
  }
};

}  // namespace hvs

#endif
