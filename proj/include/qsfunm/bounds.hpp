#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qsfunm/dense.hpp"
#include "qsfunm/functions.hpp"

namespace qsfunm {

enum class RegionKind { Disc, RealInterval, HullDisc };

/// (rho, R_A, V) for a region containing the spectrum, plus what is needed
/// to evaluate delta(r) = max_{C_r} |z| on the level curves C_r.
struct Enclosure {
  RegionKind kind = RegionKind::Disc;
  double rho = 0.0;
  double rOuter = 1.0;
  double totalRotation = 2.0 * std::numbers::pi;
  double intervalHalfWidth = 0.0;  // a, for RealInterval
  Complex hullCenter{0.0, 0.0};    // for HullDisc

  double deltaOf(double r) const;
  double alpha() const { return std::log(rOuter / rho); }
};

/// [-a, a] with 0 < a < 1, mapped by psi(w) = w + a^2/(4w).
Enclosure enclosure_interval(double a);
/// Disc of radius normRatio about the origin.
Enclosure enclosure_disc(double normRatio);
/// Disc B(center, radius) inside the unit disc.
Enclosure enclosure_hull_disc(Complex center, double radius);
/// Smallest disc containing an outer polygon of the numerical range: the
/// support lines from numerical_range_boundary are intersected pairwise and
/// the vertices enclosed by Welzl's algorithm.
Enclosure enclosure_numerical_range(const DenseMatrix& a, int nAngles = 256);

struct Disc {
  Complex center;
  double radius = 0.0;
};
Disc smallest_enclosing_disc(std::vector<Complex> points);

/// Lambda(rho, R_A, V, R), with the minimum over r in (rho, R_A) taken on a
/// 512-point geometric grid and refined once around the grid minimizer.
double lambda_factor(const Enclosure& e, double R);

/// Minimand of lambda_factor at a single r; exposed for reference grids.
double lambda_inner(const Enclosure& e, double R, double r);

/// What the bounds need to know about f around z0.
struct FunctionMeta {
  std::function<double(Complex)> logAbs;
  double admissibleRmax = std::numeric_limits<double>::infinity();
  Complex z0{0.0, 0.0};
  double innerRadius = 1.0;  // R'

  /// log of 1.01 * max over 1024 equispaced points of |f(z0 + R e^{i theta})|.
  double log_max_modulus(double R) const;
  double max_modulus(double R) const { return std::exp(log_max_modulus(R)); }
  bool entire() const { return !std::isfinite(admissibleRmax); }
};

FunctionMeta function_meta(const RegisteredFunction& f, Complex z0 = 0.0,
                           double innerRadius = 1.0);

/// l -> gamma e^{-(alpha + alpha') (l - shift) / k}, constant gamma for l <= shift.
struct DecayBound {
  double logGamma = 0.0;
  double alpha = 0.0;
  double alphaPrime = 0.0;
  long k = 1;
  long poleShift = 0;  // t * k
  double R = 0.0;

  double gamma() const { return std::exp(logGamma); }
  double rate() const { return (alpha + alphaPrime) / static_cast<double>(k); }
  double log_value(long l) const;
  double operator()(long l) const { return std::exp(log_value(l)); }
};

struct DecayBoundParams {
  Enclosure enclosure;
  FunctionMeta function;
  long k = 1;                 // quasiseparable rank
  double kappaMax = 1.0;      // largest kappa_s over A and its trailing blocks
  double normShifted = 1.0;   // ||A - z0 I||_2
  long t = 0;                 // number of simple poles inside B(z0, R)
  long jordanShift = 0;       // size of the largest Jordan block minus one
  std::optional<double> crouzeixC;  // use C in place of kappa, e.g. 11.08

  void validate() const;
};

inline constexpr double kCrouzeixDefault = 11.08;

DecayBound offdiag_decay_bound(const DecayBoundParams& p, double R);

/// 256-point log grid of admissible R values.
std::vector<double> r_grid(const FunctionMeta& fm, int points = 256);

/// Bounds at every grid R, so that optimizing many l is cheap.
class BoundCurve {
 public:
  explicit BoundCurve(const DecayBoundParams& p, int gridPoints = 256);

  double value(long l) const;
  double best_R(long l) const;
  const std::vector<DecayBound>& candidates() const { return candidates_; }

 private:
  std::size_t argmin(long l) const;
  std::vector<DecayBound> candidates_;
};

struct OptimizedBound {
  double R = 0.0;
  double value = 0.0;
};

OptimizedBound optimize_R(const DecayBoundParams& p, long l);

/// CSV with columns l,bound (and sigma_l when sigmas are given, sigmas[l-1]).
void write_bound_csv(std::ostream& os, const BoundCurve& curve, long lmax,
                     const std::vector<double>* sigmas = nullptr);

/// [b, Ab, ..., A^{n-1} b].
template <typename DA, typename DB>
Matrix<typename DA::Scalar> krylov_matrix(const Eigen::MatrixBase<DA>& a,
                                          const Eigen::MatrixBase<DB>& b, Index n) {
  using Scalar = typename DA::Scalar;
  detail::require_square(a, "krylov_matrix");
  if (b.cols() != 1 || b.rows() != a.rows()) {
    throw DimensionMismatch("krylov_matrix: b must be a column of length " +
                            std::to_string(a.rows()));
  }
  if (n < 1) throw InvalidArgument("krylov_matrix: n must be >= 1");
  Matrix<Scalar> u(a.rows(), n);
  u.col(0) = b;
  for (Index j = 1; j < n; ++j) u.col(j) = a * u.col(j - 1);
  return u;
}

/// Column j (1-based) is sum_{n=0}^{j-1} a_{s-j+1+n} A^n b, built by Horner's
/// rule: col_1 = a_s b, col_{j+1} = A col_j + a_{s-j} b.
template <typename DA, typename DB>
Matrix<typename DA::Scalar> horner_matrix(const Eigen::MatrixBase<DA>& a,
                                          const Eigen::MatrixBase<DB>& b,
                                          const std::vector<typename DA::Scalar>& coeffs) {
  using Scalar = typename DA::Scalar;
  detail::require_square(a, "horner_matrix");
  if (b.cols() != 1 || b.rows() != a.rows()) {
    throw DimensionMismatch("horner_matrix: b must be a column of length " +
                            std::to_string(a.rows()));
  }
  const Index s = static_cast<Index>(coeffs.size());
  if (s < 1) throw InvalidArgument("horner_matrix: need at least one coefficient");
  Matrix<Scalar> h(a.rows(), s);
  h.col(0) = coeffs[s - 1] * b;
  for (Index j = 1; j < s; ++j) h.col(j) = a * h.col(j - 1) + coeffs[s - 1 - j] * b;
  return h;
}

/// Lower-left (m-p) x p block of sum_{n=1}^{s} a_n A^n, assembled from the
/// SVD dyads sigma_i u_i v_i^* of the lower-left block C of A as
/// sum_i Krylov(D, u_i, s) Pi_s Horner(A^T, [sigma_i conj(v_i); 0], a)^T [I; 0].
DenseMatrix offdiag_via_krylov_horner(const DenseMatrix& a, Index p,
                                      const std::vector<Complex>& coeffs,
                                      std::optional<Index> declaredRank = std::nullopt);

/// c(r) kappa (rho/r)^i delta^j, c(r) = V bNorm / (delta pi (1 - rho/r)),
/// delta = deltaOf(r). Row i is 0-based, column j 1-based.
double r_factor_bound_krylov(const Enclosure& e, double kappa, double bNorm, double r, long i,
                             long j);

/// c kappa (rho/R_A)^i rhoHat^{i+s-j},
/// c = rhoHat gammaHat V bNorm / (pi (1 - rhoHat)(1 - rho/R_A)).
double r_factor_bound_horner(const Enclosure& e, double kappa, double bNorm, double gammaHat,
                             double rhoHat, long s, long i, long j);

/// Smallest gammaHat with |a_j| <= gammaHat rhoHat^j for all j (1-based).
double horner_gamma_hat(const std::vector<Complex>& coeffs, double rhoHat);

/// gamma e^{-(alpha+alpha')(l+1)}, alpha = log(R_A/rho), alpha' = log R,
/// gamma = gammaHat kappa1 kappa2 |b1| |b2| Lambda(rho, R_A, V, R).
double outer_product_sv_bound(const Enclosure& e, double kappa1, double kappa2, double b1Norm,
                              double b2Norm, double gammaHat, double R, long l);

/// gamma e^{-alpha (l+1)}, gamma = c^2 n e^{-(n+1) beta} / (1 - e^{-2 alpha}).
double tail_sv_bound(double c, long n, double alpha, double beta, long l);

enum class CompositionMode { DyadSum, RankKSum, RankShift };

struct CompositionParams {
  double gamma = 0.0;
  double alpha = 0.0;
  long k = 1;
  long l = 1;
  /// Singular values of A for RankShift (sigmaA[0] = sigma_1).
  std::vector<double> sigmaA;
};

/// DyadSum:   gamma/(1-e^{-alpha}) e^{-alpha (l-k)/k}
/// RankKSum:  k gamma/(1-e^{-alpha}) e^{-alpha (l-k)/k}
/// RankShift: bound sigma_l(A) on sigma_{l+k}(A+B) for rank(B) = k
double sv_composition_bound(CompositionMode mode, const CompositionParams& p);
CompositionMode parse_composition_mode(const std::string& name);

/// Largest spectral condition proxy over A and its trailing block
/// A(split:, split:); exactly 1 for Hermitian A.
double kappa_max_trailing(const DenseMatrix& a, Index split);

}  // namespace qsfunm
