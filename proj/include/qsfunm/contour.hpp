#pragma once

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "qsfunm/dense.hpp"
#include "qsfunm/functions.hpp"
#include "qsfunm/hodlr.hpp"
#include "qsfunm/matrix_io.hpp"

namespace qsfunm {

/// Circle z0 + r e^{i theta} and the stopping parameters of the doubling
/// trapezoidal rule.
struct ContourSpec {
  Complex center{0.0, 0.0};
  double radius = 1.0;
  double tolerance = std::sqrt(kUnitRoundoff);
  long startNodes = 1;
  long maxNodes = 1L << 20;
  /// Skip the spectrum-inside-contour check (the caller vouches for it).
  bool assumeSpectrumInside = false;

  void validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw InvalidArgument("contour radius must be positive and finite");
    }
    if (!(tolerance > 0.0)) throw InvalidArgument("contour tolerance must be positive");
    if (startNodes < 1) throw InvalidArgument("startNodes must be >= 1");
    if (maxNodes < startNodes) throw InvalidArgument("maxNodes must be >= startNodes");
  }

  Complex node(long k, long n) const {
    return center + std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(k) / n);
  }
};

template <typename M>
struct QuadratureReport {
  M result;
  long nodesUsed = 0;
  std::vector<long> nodeCounts;        // N after each doubling
  std::vector<double> successiveDiffs; // ||M_N - M_{N/2}||_2 for the same N
  long resolventEvaluations = 0;

  void write_csv(std::ostream& os) const {
    os << "N,diff\n";
    for (std::size_t i = 0; i < successiveDiffs.size(); ++i) {
      os << nodeCounts[i] << ',' << format_real(successiveDiffs[i]) << '\n';
    }
  }
};

template <typename M>
struct PoleCorrectedResult {
  QuadratureReport<M> integral;
  M correction;  // sum_j R_j(z_j I - A)
  M result;      // integral.result - correction
};

namespace detail {

struct DenseBackend {
  using Mat = DenseMatrix;
  const DenseMatrix& a;

  Index size() const { return a.rows(); }

  void check_contour(const ContourSpec& spec) const {
    if (spec.assumeSpectrumInside) return;
    const DenseVector ev = eigenvalues(a);
    double far = 0.0;
    for (Index i = 0; i < ev.size(); ++i) far = std::max(far, std::abs(ev(i) - spec.center));
    if (!(far < spec.radius)) {
      throw InvalidGeometry("spectrum reaches distance " + format_real(far) +
                            " from the contour center, radius is " + format_real(spec.radius));
    }
  }

  Mat zero() const { return Mat::Zero(size(), size()); }

  Mat resolvent(Complex z) const {
    Mat shifted = -a;
    shifted.diagonal().array() += z;
    Eigen::PartialPivLU<Mat> lu(shifted);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) {
      throw NodeSingularity("resolvent singular at node z = " + format_complex(z) +
                            " (rcond " + format_real(rc) + ")");
    }
    return lu.inverse();
  }

  static void accumulate(Mat& acc, Complex w, const Mat& r) { acc.noalias() += w * r; }
  static Mat scaled(const Mat& m, Complex s) { return s * m; }
  static Mat plus(const Mat& x, const Mat& y) { return x + y; }
  static double diff_norm(const Mat& x, const Mat& y) { return norm2(x - y); }

  Mat shifted_identity_minus_a(Complex z) const {
    Mat x = -a;
    x.diagonal().array() += z;
    return x;
  }

  Mat inverse(const Mat& x, const char* what) const {
    Eigen::PartialPivLU<Mat> lu(x);
    if (!(lu.rcond() > 1e-14)) throw SingularArgument(std::string(what) + " is singular");
    return lu.inverse();
  }

  static Mat multiply(const Mat& x, const Mat& y) { return x * y; }
  Mat identity_scaled(Complex c) const { return c * Mat::Identity(size(), size()); }
};

struct HodlrBackend {
  using Mat = HodlrMatrixC;
  const HodlrMatrixC& a;
  HodlrConfig cfg;

  Index size() const { return a.size(); }

  void check_contour(const ContourSpec& spec) const {
    if (spec.assumeSpectrumInside) return;
    const double g = hodlr_gershgorin_radius(a, spec.center);
    if (!(g < spec.radius)) {
      throw InvalidGeometry("Gershgorin radius " + format_real(g) +
                            " does not certify the spectrum inside radius " +
                            format_real(spec.radius) + "; assert it explicitly if known");
    }
  }

  Mat zero() const { return hodlr_zero<Complex>(size(), cfg); }

  Mat resolvent(Complex z) const {
    try {
      return hodlr_inverse(hodlr_scale_shift(a, Complex(-1.0), z), cfg);
    } catch (const SingularPivot& e) {
      throw NodeSingularity("resolvent singular at node z = " + format_complex(z) + ": " +
                            e.what());
    }
  }

  void accumulate(Mat& acc, Complex w, const Mat& r) const {
    acc = hodlr_add(acc, hodlr_scale(r, w), cfg);
  }
  static Mat scaled(const Mat& m, Complex s) { return hodlr_scale(m, s); }
  Mat plus(const Mat& x, const Mat& y) const { return hodlr_add(x, y, cfg); }
  double diff_norm(const Mat& x, const Mat& y) const {
    return hodlr_norm2_estimate(hodlr_add(x, hodlr_scale(y, Complex(-1.0)), cfg));
  }

  Mat shifted_identity_minus_a(Complex z) const { return hodlr_scale_shift(a, Complex(-1.0), z); }

  Mat inverse(const Mat& x, const char* what) const {
    try {
      return hodlr_inverse(x, cfg);
    } catch (const SingularPivot& e) {
      throw SingularArgument(std::string(what) + " is singular: " + e.what());
    }
  }

  Mat multiply(const Mat& x, const Mat& y) const { return hodlr_mul(x, y, cfg); }
  Mat identity_scaled(Complex c) const { return hodlr_identity<Complex>(size(), cfg, c); }
};

template <typename Backend>
typename Backend::Mat quadrature_fixed(const ScalarFunction& f, const Backend& be, long n,
                                       const ContourSpec& spec, long& evaluations) {
  if (n < 1) throw InvalidArgument("quadrature needs N >= 1 nodes");
  auto m = be.zero();
  for (long k = 0; k < n; ++k) {
    const Complex z = spec.node(k, n);
    const Complex w = (z - spec.center) * f(z) / static_cast<double>(n);
    be.accumulate(m, w, be.resolvent(z));
    ++evaluations;
  }
  return m;
}

template <typename Backend>
QuadratureReport<typename Backend::Mat> adaptive(const ScalarFunction& f, const Backend& be,
                                                 const ContourSpec& spec) {
  spec.validate();
  be.check_contour(spec);
  QuadratureReport<typename Backend::Mat> rep;
  long n = spec.startNodes;
  rep.result = quadrature_fixed(f, be, n, spec, rep.resolventEvaluations);
  while (2 * n <= spec.maxNodes) {
    const auto old = rep.result;
    n *= 2;
    // New nodes are the odd indices of the refined grid; even ones are
    // the previous nodes, whose weights halve.
    auto fresh = be.zero();
    for (long j = 1; j < n; j += 2) {
      const Complex z = spec.node(j, n);
      const Complex w = (z - spec.center) * f(z) / static_cast<double>(n);
      be.accumulate(fresh, w, be.resolvent(z));
      ++rep.resolventEvaluations;
    }
    rep.result = be.plus(Backend::scaled(old, Complex(0.5)), fresh);
    const double diff = be.diff_norm(rep.result, old);
    rep.nodeCounts.push_back(n);
    rep.successiveDiffs.push_back(diff);
    if (diff <= spec.tolerance) {
      rep.nodesUsed = n;
      return rep;
    }
  }
  std::string history;
  for (std::size_t i = 0; i < rep.successiveDiffs.size(); ++i) {
    history += " N=" + std::to_string(rep.nodeCounts[i]) + ":" + format_real(rep.successiveDiffs[i]);
  }
  throw NonConvergence("contour quadrature did not reach tolerance " +
                       format_real(spec.tolerance) + " within " + std::to_string(spec.maxNodes) +
                       " nodes; diffs:" + history);
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// Coefficients c_l of R_j(z) = sum_l c_l z^{-l}, l = 1..d.
inline std::vector<Complex> pole_coefficients(const PoleSpec& p) {
  p.validate();
  std::vector<Complex> c(static_cast<std::size_t>(p.order));
  for (int l = 1; l <= p.order; ++l) {
    const double sign = (l % 2 == 1) ? 1.0 : -1.0;
    c[l - 1] = sign * p.fjDerivatives[p.order - l] / factorial(p.order - l);
  }
  return c;
}

template <typename Backend>
typename Backend::Mat rational_rj(const PoleSpec& p, const typename Backend::Mat& x,
                                  const Backend& be) {
  const auto c = pole_coefficients(p);
  const auto y = be.inverse(x, "pole correction argument");
  // Horner in Y = X^{-1}: Y (c_1 + Y (c_2 + ... + Y c_d))
  auto acc = be.multiply(y, be.identity_scaled(c.back()));
  for (int l = p.order - 1; l >= 1; --l) {
    acc = be.multiply(y, be.plus(be.identity_scaled(c[l - 1]), acc));
  }
  return acc;
}

template <typename Backend>
PoleCorrectedResult<typename Backend::Mat> with_poles(const ScalarFunction& f,
                                                      const std::vector<PoleSpec>& poles,
                                                      const Backend& be, const ContourSpec& spec) {
  spec.validate();
  for (const auto& p : poles) {
    p.validate();
    const double dist = std::abs(p.location - spec.center);
    if (std::abs(dist - spec.radius) <= 1e-8 * spec.radius) {
      throw DegenerateContour("pole " + format_complex(p.location) + " lies on the contour");
    }
    if (dist > spec.radius) {
      throw InvalidArgument("pole " + format_complex(p.location) +
                            " lies outside the contour; list only enclosed poles");
    }
  }
  PoleCorrectedResult<typename Backend::Mat> out;
  out.integral = adaptive(f, be, spec);
  out.correction = be.zero();
  for (const auto& p : poles) {
    out.correction =
        be.plus(out.correction, rational_rj(p, be.shifted_identity_minus_a(p.location), be));
  }
  out.result = be.plus(out.integral.result, Backend::scaled(out.correction, Complex(-1.0)));
  return out;
}

}  // namespace detail

/// (1/N) sum_k (z_k - z0) f(z_k) (z_k I - A)^{-1}, k = 0..N-1.
inline DenseMatrix contour_quadrature_fixed(const ScalarFunction& f, const DenseMatrix& a, long n,
                                            const ContourSpec& spec) {
  spec.validate();
  detail::require_square(a, "contour_quadrature_fixed");
  long evals = 0;
  return detail::quadrature_fixed(f, detail::DenseBackend{a}, n, spec, evals);
}

inline HodlrMatrixC contour_quadrature_fixed(const ScalarFunction& f, const HodlrMatrixC& a,
                                             long n, const ContourSpec& spec,
                                             const HodlrConfig& cfg = {}) {
  spec.validate();
  long evals = 0;
  return detail::quadrature_fixed(f, detail::HodlrBackend{a, cfg}, n, spec, evals);
}

/// Doubling trapezoidal rule with node reuse; stops once two successive
/// approximations differ by at most spec.tolerance in the 2-norm (exact
/// for dense, power-iteration estimate for HODLR).
inline QuadratureReport<DenseMatrix> contour_adaptive(const ScalarFunction& f,
                                                      const DenseMatrix& a,
                                                      const ContourSpec& spec) {
  detail::require_square(a, "contour_adaptive");
  detail::require_finite(a, "contour_adaptive");
  return detail::adaptive(f, detail::DenseBackend{a}, spec);
}

inline QuadratureReport<HodlrMatrixC> contour_adaptive(const ScalarFunction& f,
                                                       const HodlrMatrixC& a,
                                                       const ContourSpec& spec,
                                                       const HodlrConfig& cfg = {}) {
  return detail::adaptive(f, detail::HodlrBackend{a, cfg}, spec);
}

/// R_j(z) = sum_{l=1}^{d} (-1)^{l+1} f_j^{(d-l)}(z_j) / (d-l)! * z^{-l}.
inline Complex pole_rational_Rj(const PoleSpec& p, Complex z) {
  if (z == Complex(0.0)) throw SingularArgument("R_j evaluated at z = 0");
  const auto c = detail::pole_coefficients(p);
  Complex acc = 0.0, zl = 1.0 / z;
  Complex pw = zl;
  for (int l = 1; l <= p.order; ++l) {
    acc += c[l - 1] * pw;
    pw *= zl;
  }
  return acc;
}

/// h-th derivative of R_j at z.
inline Complex pole_rational_Rj_derivative(const PoleSpec& p, Complex z, int h) {
  if (h < 0) throw InvalidArgument("derivative order must be >= 0");
  if (z == Complex(0.0)) throw SingularArgument("R_j evaluated at z = 0");
  p.validate();
  const int d = p.order;
  Complex acc = 0.0;
  for (int l = 1; l <= d; ++l) {
    const double sign = ((l + h + 1) % 2 == 0) ? 1.0 : -1.0;
    const double w = detail::factorial(l + h - 1) /
                     (detail::factorial(d - l) * detail::factorial(l - 1));
    acc += sign * w * p.fjDerivatives[d - l] * std::pow(z, -(h + l));
  }
  return acc;
}

inline DenseMatrix pole_rational_Rj(const PoleSpec& p, const DenseMatrix& x) {
  detail::require_square(x, "pole_rational_Rj");
  return detail::rational_rj(p, x, detail::DenseBackend{x});
}

inline HodlrMatrixC pole_rational_Rj(const PoleSpec& p, const HodlrMatrixC& x,
                                     const HodlrConfig& cfg = {}) {
  return detail::rational_rj(p, x, detail::HodlrBackend{x, cfg});
}

/// f(A) for f meromorphic inside the contour: the contour integral minus
/// the pole corrections sum_j R_j(z_j I - A).
inline PoleCorrectedResult<DenseMatrix> funm_with_poles(const ScalarFunction& f,
                                                        const std::vector<PoleSpec>& poles,
                                                        const DenseMatrix& a,
                                                        const ContourSpec& spec) {
  detail::require_square(a, "funm_with_poles");
  return detail::with_poles(f, poles, detail::DenseBackend{a}, spec);
}

inline PoleCorrectedResult<HodlrMatrixC> funm_with_poles(const ScalarFunction& f,
                                                         const std::vector<PoleSpec>& poles,
                                                         const HodlrMatrixC& a,
                                                         const ContourSpec& spec,
                                                         const HodlrConfig& cfg = {}) {
  return detail::with_poles(f, poles, detail::HodlrBackend{a, cfg}, spec);
}

namespace detail {

inline DenseMatrix contour_adaptive_any(const ScalarFunction& f, const DenseMatrix& a,
                                        const ContourSpec& spec, const HodlrConfig&) {
  return qsfunm::contour_adaptive(f, a, spec).result;
}

inline HodlrMatrixC contour_adaptive_any(const ScalarFunction& f, const HodlrMatrixC& a,
                                         const ContourSpec& spec, const HodlrConfig& cfg) {
  return qsfunm::contour_adaptive(f, a, spec, cfg).result;
}

}  // namespace detail

/// f1(A - aI) + f2((A - aI)^{-1}) for f with an essential singularity at a.
/// An empty handle drops its term. spec1 and spec2 are the contours for the
/// two terms, normally centered at 0.
template <typename M>
M funm_essential(const ScalarFunction& f1, const ScalarFunction& f2, Complex a, const M& mat,
                 const ContourSpec& spec1, const ContourSpec& spec2, const HodlrConfig& cfg = {}) {
  auto run = [&](const auto& be) {
    const auto shifted = be.shifted_identity_minus_a(a);  // aI - A
    const auto b = std::decay_t<decltype(be)>::scaled(shifted, Complex(-1.0));
    auto out = be.zero();
    if (f1) out = be.plus(out, detail::contour_adaptive_any(f1, b, spec1, cfg));
    if (f2) {
      const auto binv = be.inverse(b, "A - aI");
      out = be.plus(out, detail::contour_adaptive_any(f2, binv, spec2, cfg));
    }
    return out;
  };
  if constexpr (std::is_same_v<M, DenseMatrix>) {
    detail::require_square(mat, "funm_essential");
    return run(detail::DenseBackend{mat});
  } else {
    return run(detail::HodlrBackend{mat, cfg});
  }
}

/// d^{d-1}/dz^{d-1} [ f(z) / (z - lambda)^{h+1} ] from fDerivs = f^{(0..d-1)}(z):
/// (d-1)!/h! sum_{l=1}^{d} (-1)^{l+1} (l+h-1)!/((d-l)!(l-1)!) f^{(d-l)}(z) (z-lambda)^{-(h+l)}.
inline Complex dth_derivative_quotient(const std::vector<Complex>& fDerivs, Complex lambda,
                                       Complex z, int d, int h) {
  if (d < 1) throw InvalidArgument("dth_derivative_quotient: d must be >= 1");
  if (h < 0) throw InvalidArgument("dth_derivative_quotient: h must be >= 0");
  if (static_cast<int>(fDerivs.size()) < d) {
    throw InvalidArgument("dth_derivative_quotient: need f^{(0..d-1)}");
  }
  if (z == lambda) throw SingularArgument("dth_derivative_quotient: z equals lambda");
  const Complex w = z - lambda;
  Complex acc = 0.0;
  for (int l = 1; l <= d; ++l) {
    const double sign = (l % 2 == 1) ? 1.0 : -1.0;
    const double c = detail::factorial(l + h - 1) /
                     (detail::factorial(d - l) * detail::factorial(l - 1));
    acc += sign * c * fDerivs[d - l] * std::pow(w, -(h + l));
  }
  return detail::factorial(d - 1) / detail::factorial(h) * acc;
}

}  // namespace qsfunm
