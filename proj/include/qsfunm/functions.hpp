#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "qsfunm/dense.hpp"

namespace qsfunm {

using ScalarFunction = std::function<Complex(Complex)>;

/// Pole z_j of order d_j together with f_j^{(0..d_j-1)}(z_j), where
/// f_j(z) = (z - z_j)^{d_j} f(z) extended by continuity.
struct PoleSpec {
  Complex location;
  int order = 1;
  std::vector<Complex> fjDerivatives;

  void validate() const;
};

/// A named scalar function with the metadata the CLI and the bounds need.
struct RegisteredFunction {
  std::string name;
  ScalarFunction value;
  /// log|f(z)|, kept separate so entire functions can be sampled on huge
  /// circles without overflow.
  std::function<double(Complex)> logAbs;
  /// Distance from center to the nearest non-holomorphic point of f
  /// (poles included); infinity for entire functions.
  std::function<double(Complex center)> admissibleRadius;
  /// Poles strictly inside B(center, radius).
  std::function<std::vector<PoleSpec>(Complex center, double radius)> polesWithin;
  bool entire = false;
};

/// Registered names: exp, log_shift4, sqrt_shift4, exp_over_sin, inv,
/// identity, one.
const RegisteredFunction& lookup_function(const std::string& name);
std::vector<std::string> registered_function_names();

/// Poles file: one pole per line, "re,im order d f0 f1 ... f(d-1)" with
/// complex tokens; the "order" keyword is optional, blank lines and lines
/// starting with '#' are skipped.
std::vector<PoleSpec> read_poles(std::istream& is);
std::vector<PoleSpec> load_poles(const std::string& path);

}  // namespace qsfunm
