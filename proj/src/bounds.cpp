#include "qsfunm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "qsfunm/matrix_io.hpp"

namespace qsfunm {

namespace {

constexpr double kPi = std::numbers::pi;

void require_open_unit(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) {
    throw InvalidArgument(std::string(what) + " must lie in (0, 1), got " + format_real(x));
  }
}

Enclosure checked(Enclosure e) {
  if (!(e.rho > 0.0 && e.rho < e.rOuter)) {
    throw InvalidGeometry("enclosure needs 0 < rho < R_A, got rho = " + format_real(e.rho) +
                          ", R_A = " + format_real(e.rOuter));
  }
  return e;
}

}  // namespace

double Enclosure::deltaOf(double r) const {
  switch (kind) {
    case RegionKind::RealInterval:
      return r + intervalHalfWidth * intervalHalfWidth / (4.0 * r);
    case RegionKind::HullDisc:
      return std::abs(hullCenter) + r;
    case RegionKind::Disc:
    default:
      return r;
  }
}

Enclosure enclosure_interval(double a) {
  require_open_unit(a, "enclosure_interval: a");
  Enclosure e;
  e.kind = RegionKind::RealInterval;
  e.intervalHalfWidth = a;
  e.rho = a / 2.0;
  e.rOuter = (1.0 + std::sqrt(1.0 - a * a)) / 2.0;
  return e;
}

Enclosure enclosure_disc(double normRatio) {
  require_open_unit(normRatio, "enclosure_disc: normRatio");
  Enclosure e;
  e.kind = RegionKind::Disc;
  e.rho = normRatio;
  e.rOuter = 1.0;
  return e;
}

Enclosure enclosure_hull_disc(Complex center, double radius) {
  if (!(radius > 0.0) || !(std::abs(center) + radius < 1.0)) {
    throw InvalidGeometry("hull disc must have positive radius and lie inside the unit disc");
  }
  Enclosure e;
  e.kind = RegionKind::HullDisc;
  e.hullCenter = center;
  e.rho = radius;
  e.rOuter = 1.0 - std::abs(center);
  return checked(e);
}

Disc smallest_enclosing_disc(std::vector<Complex> pts) {
  if (pts.empty()) throw InvalidArgument("smallest_enclosing_disc: no points");
  std::mt19937 rng(12345u);
  std::shuffle(pts.begin(), pts.end(), rng);
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, std::abs(p));
  const double slack = 1e-12 * std::max(scale, 1.0);
  const auto inside = [&](const Disc& d, Complex p) {
    return std::abs(p - d.center) <= d.radius + slack;
  };
  const auto two = [](Complex a, Complex b) { return Disc{(a + b) / 2.0, std::abs(a - b) / 2.0}; };
  const auto three = [&](Complex a, Complex b, Complex c) {
    const Complex bb = b - a, cc = c - a;
    const double d = 2.0 * (bb.real() * cc.imag() - bb.imag() * cc.real());
    if (std::abs(d) < 1e-300) {
      // collinear: the farthest pair spans the disc
      Disc best = two(a, b);
      for (const Disc& cand : {two(a, c), two(b, c)}) {
        if (cand.radius > best.radius) best = cand;
      }
      return best;
    }
    const double b2 = std::norm(bb), c2 = std::norm(cc);
    const Complex u((cc.imag() * b2 - bb.imag() * c2) / d, (bb.real() * c2 - cc.real() * b2) / d);
    return Disc{a + u, std::abs(u)};
  };
  Disc d{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (inside(d, pts[i])) continue;
    d = Disc{pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (inside(d, pts[j])) continue;
      d = two(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (!inside(d, pts[k])) d = three(pts[i], pts[j], pts[k]);
      }
    }
  }
  return d;
}

Enclosure enclosure_numerical_range(const DenseMatrix& a, int nAngles) {
  const auto samples = numerical_range_boundary(a, nAngles);
  std::vector<Complex> vertices;
  vertices.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s1 = samples[k];
    const auto& s2 = samples[(k + 1) % samples.size()];
    const double c1 = std::cos(s1.angle), n1 = std::sin(s1.angle);
    const double c2 = std::cos(s2.angle), n2 = std::sin(s2.angle);
    const double det = c1 * n2 - n1 * c2;
    vertices.emplace_back((s1.support * n2 - n1 * s2.support) / det,
                          (c1 * s2.support - s1.support * c2) / det);
  }
  const Disc d = smallest_enclosing_disc(vertices);
  if (!(d.radius > 0.0)) throw InvalidGeometry("numerical range is a single point");
  return enclosure_hull_disc(d.center, d.radius);
}

double lambda_inner(const Enclosure& e, double R, double r) {
  const double delta = std::max(1.0 / R, e.deltaOf(r));
  const double q = e.rho / r;
  return 1.0 / (delta * (1.0 - delta * delta) * (r / e.rho - 1.0) * std::sqrt(1.0 - q * q));
}

double lambda_factor(const Enclosure& e, double R) {
  checked(e);
  if (!(R > 1.0)) throw InvalidArgument("lambda_factor: R must exceed 1, got " + format_real(R));
  constexpr int kGrid = 512;
  const auto geometric_min = [&](double lo, double hi, double& arg) {
    double best = std::numeric_limits<double>::infinity();
    const double step = std::log(hi / lo) / (kGrid + 1);
    for (int i = 1; i <= kGrid; ++i) {
      const double r = lo * std::exp(step * i);
      const double v = lambda_inner(e, R, r);
      if (v < best) {
        best = v;
        arg = r;
      }
    }
    return best;
  };
  double arg = 0.0;
  geometric_min(e.rho, e.rOuter, arg);
  const double ratio = std::pow(e.rOuter / e.rho, 1.0 / (kGrid + 1));
  const double lo = std::max(e.rho, arg / ratio);
  const double hi = std::min(e.rOuter, arg * ratio);
  double arg2 = arg;
  const double refined = std::min(geometric_min(lo, hi, arg2), lambda_inner(e, R, arg));
  const double q = e.rho / (R * e.rOuter);
  const double v = e.totalRotation;
  const double pre =
      v * v / (kPi * kPi * (R - 1.0) * (1.0 - e.rho / e.rOuter) * std::sqrt(1.0 - q * q));
  return pre * refined;
}

double FunctionMeta::log_max_modulus(double R) const {
  constexpr int kSamples = 1024;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kSamples; ++k) {
    const Complex z = z0 + std::polar(R, 2.0 * kPi * k / kSamples);
    best = std::max(best, logAbs(z));
  }
  return best + std::log(1.01);
}

FunctionMeta function_meta(const RegisteredFunction& f, Complex z0, double innerRadius) {
  FunctionMeta fm;
  fm.logAbs = f.logAbs;
  fm.admissibleRmax = f.admissibleRadius(z0);
  fm.z0 = z0;
  fm.innerRadius = innerRadius;
  return fm;
}

double DecayBound::log_value(long l) const {
  const long excess = std::max<long>(0, l - poleShift);
  return logGamma - rate() * static_cast<double>(excess);
}

void DecayBoundParams::validate() const {
  checked(enclosure);
  if (k < 1) throw InvalidArgument("decay bound: k must be >= 1");
  if (!(kappaMax >= 1.0)) throw InvalidArgument("decay bound: kappaMax must be >= 1");
  if (!(normShifted >= 0.0)) throw InvalidArgument("decay bound: normShifted must be >= 0");
  if (t < 0 || jordanShift < 0) throw InvalidArgument("decay bound: t and jordanShift must be >= 0");
  if (crouzeixC && !(*crouzeixC > 0.0)) throw InvalidArgument("decay bound: C must be positive");
  if (!function.logAbs) throw InvalidArgument("decay bound: function has no modulus");
  if (!(function.innerRadius > 0.0)) throw InvalidArgument("decay bound: R' must be positive");
  if (!(function.admissibleRmax > function.innerRadius)) {
    throw InvalidGeometry("decay bound: f is not holomorphic on any disc larger than R'");
  }
}

DecayBound offdiag_decay_bound(const DecayBoundParams& p, double R) {
  p.validate();
  const Enclosure& e = p.enclosure;
  const double rp = p.function.innerRadius;
  if (!(R > rp)) throw InvalidArgument("decay bound: R must exceed R' = " + format_real(rp));
  if (!(R < p.function.admissibleRmax)) {
    throw InvalidArgument("decay bound: f is not holomorphic on B(z0, " + format_real(R) + ")");
  }
  const double denom = R * e.rOuter - e.rho * rp;
  if (!(denom > 0.0)) throw InvalidGeometry("decay bound: R R_A <= rho R'");

  DecayBound b;
  b.alpha = e.alpha();
  b.alphaPrime = std::log(R / rp);
  b.k = p.k;
  b.poleShift = p.t * p.k;
  b.R = R;
  const double conditioning = p.crouzeixC ? *p.crouzeixC : p.kappaMax;
  b.logGamma = p.function.log_max_modulus(R) + 2.0 * std::log(conditioning) +
               std::log(p.normShifted) + std::log(lambda_factor(e, R / rp)) +
               std::log(static_cast<double>(p.k) * e.rho) - std::log(denom);
  if (p.jordanShift > 0) {
    // one factor e and (R_A/rho)^{shift} from each of the two R factors
    b.logGamma += 2.0 + 2.0 * static_cast<double>(p.jordanShift) * b.alpha;
  }
  return b;
}

std::vector<double> r_grid(const FunctionMeta& fm, int points) {
  if (points < 2) throw InvalidArgument("r_grid: need at least 2 points");
  const double lo = fm.innerRadius * (1.0 + 1e-6);
  const double hi = fm.entire() ? fm.innerRadius * std::exp(30.0) : fm.admissibleRmax * (1.0 - 1e-6);
  if (!(hi > lo)) throw InvalidGeometry("r_grid: admissible R interval is empty");
  std::vector<double> out(static_cast<std::size_t>(points));
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) out[i] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

BoundCurve::BoundCurve(const DecayBoundParams& p, int gridPoints) {
  p.validate();
  for (double R : r_grid(p.function, gridPoints)) candidates_.push_back(offdiag_decay_bound(p, R));
}

std::size_t BoundCurve::argmin(long l) const {
  std::size_t best = 0;
  double bestLog = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    const double v = candidates_[i].log_value(l);
    if (v < bestLog) {
      bestLog = v;
      best = i;
    }
  }
  return best;
}

double BoundCurve::value(long l) const { return candidates_[argmin(l)](l); }
double BoundCurve::best_R(long l) const { return candidates_[argmin(l)].R; }

OptimizedBound optimize_R(const DecayBoundParams& p, long l) {
  const BoundCurve curve(p);
  return {curve.best_R(l), curve.value(l)};
}

void write_bound_csv(std::ostream& os, const BoundCurve& curve, long lmax,
                     const std::vector<double>* sigmas) {
  os << (sigmas ? "l,bound,sigma_l\n" : "l,bound\n");
  for (long l = 1; l <= lmax; ++l) {
    os << l << ',' << format_real(curve.value(l));
    if (sigmas) {
      const auto idx = static_cast<std::size_t>(l - 1);
      os << ',' << format_real(idx < sigmas->size() ? (*sigmas)[idx] : 0.0);
    }
    os << '\n';
  }
}

DenseMatrix offdiag_via_krylov_horner(const DenseMatrix& a, Index p,
                                      const std::vector<Complex>& coeffs,
                                      std::optional<Index> declaredRank) {
  detail::require_square(a, "offdiag_via_krylov_horner");
  const Index m = a.rows();
  if (p < 1 || p >= m) throw InvalidArgument("offdiag_via_krylov_horner: split out of range");
  const Index s = static_cast<Index>(coeffs.size());
  if (s < 1) throw InvalidArgument("offdiag_via_krylov_horner: need at least one coefficient");
  const DenseMatrix c = a.bottomLeftCorner(m - p, p);
  const DenseMatrix dbar = a.bottomRightCorner(m - p, m - p);
  const DenseMatrix at = a.transpose();
  const auto svd = truncated_svd(c, 1e-14);
  if (declaredRank && svd.rank() > *declaredRank) {
    throw InvalidArgument("offdiag_via_krylov_horner: lower-left block has numerical rank " +
                          std::to_string(svd.rank()) + " > declared " +
                          std::to_string(*declaredRank));
  }
  DenseMatrix out = DenseMatrix::Zero(m - p, p);
  for (Index i = 0; i < svd.rank(); ++i) {
    const DenseVector u = svd.left.col(i);
    DenseVector vt = DenseVector::Zero(m);
    vt.head(p) = svd.singular(i) * svd.right.col(i).conjugate();
    const DenseMatrix k = krylov_matrix(dbar, u, s);
    const DenseMatrix h = horner_matrix(at, vt, coeffs);
    // K Pi_s H^T restricted to the first p columns
    out.noalias() += k * h.rowwise().reverse().transpose().leftCols(p);
  }
  return out;
}

double r_factor_bound_krylov(const Enclosure& e, double kappa, double bNorm, double r, long i,
                             long j) {
  checked(e);
  if (!(r > e.rho && r < e.rOuter)) {
    throw InvalidArgument("r_factor_bound_krylov: r must lie in (rho, R_A)");
  }
  if (i < 0 || j < 1) throw InvalidArgument("r_factor_bound_krylov: need i >= 0, j >= 1");
  const double delta = e.deltaOf(r);
  const double c = e.totalRotation * bNorm / (delta * kPi * (1.0 - e.rho / r));
  return c * kappa * std::pow(e.rho / r, static_cast<double>(i)) *
         std::pow(delta, static_cast<double>(j));
}

double r_factor_bound_horner(const Enclosure& e, double kappa, double bNorm, double gammaHat,
                             double rhoHat, long s, long i, long j) {
  checked(e);
  require_open_unit(rhoHat, "r_factor_bound_horner: rhoHat");
  if (!(gammaHat >= 0.0)) throw InvalidArgument("r_factor_bound_horner: gammaHat must be >= 0");
  if (s < 1 || i < 0 || j < 1 || j > s) {
    throw InvalidArgument("r_factor_bound_horner: need s >= 1, i >= 0, 1 <= j <= s");
  }
  const double q = e.rho / e.rOuter;
  const double c = rhoHat * gammaHat * e.totalRotation * bNorm / (kPi * (1.0 - rhoHat) * (1.0 - q));
  return c * kappa * std::pow(q, static_cast<double>(i)) *
         std::pow(rhoHat, static_cast<double>(i + s - j));
}

double horner_gamma_hat(const std::vector<Complex>& coeffs, double rhoHat) {
  require_open_unit(rhoHat, "horner_gamma_hat: rhoHat");
  double g = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    g = std::max(g, std::abs(coeffs[j]) / std::pow(rhoHat, static_cast<double>(j + 1)));
  }
  return g;
}

double outer_product_sv_bound(const Enclosure& e, double kappa1, double kappa2, double b1Norm,
                              double b2Norm, double gammaHat, double R, long l) {
  if (l < 0) throw InvalidArgument("outer_product_sv_bound: l must be >= 0");
  const double gamma = gammaHat * kappa1 * kappa2 * b1Norm * b2Norm * lambda_factor(e, R);
  return gamma * std::exp(-(e.alpha() + std::log(R)) * static_cast<double>(l + 1));
}

double tail_sv_bound(double c, long n, double alpha, double beta, long l) {
  if (!(alpha > 0.0) || !(beta > 0.0) || n < 1 || l < 0) {
    throw InvalidArgument("tail_sv_bound: need alpha, beta > 0, n >= 1, l >= 0");
  }
  const double gamma = c * c * static_cast<double>(n) * std::exp(-(n + 1) * beta) /
                       (1.0 - std::exp(-2.0 * alpha));
  return gamma * std::exp(-alpha * static_cast<double>(l + 1));
}

double sv_composition_bound(CompositionMode mode, const CompositionParams& p) {
  switch (mode) {
    case CompositionMode::DyadSum:
    case CompositionMode::RankKSum: {
      if (!(p.alpha > 0.0) || p.k < 1 || !(p.gamma >= 0.0)) {
        throw InvalidArgument("composition bound: need alpha > 0, k >= 1, gamma >= 0");
      }
      const double kk = static_cast<double>(p.k);
      double g = p.gamma / (1.0 - std::exp(-p.alpha));
      if (mode == CompositionMode::RankKSum) g *= kk;
      return g * std::exp(-p.alpha * (static_cast<double>(p.l) - kk) / kk);
    }
    case CompositionMode::RankShift: {
      if (p.l < 1 || p.k < 0) throw InvalidArgument("rank shift: need l >= 1, k >= 0");
      const auto idx = static_cast<std::size_t>(p.l - 1);
      return idx < p.sigmaA.size() ? p.sigmaA[idx] : 0.0;
    }
  }
  throw InvalidArgument("unknown composition mode");
}

CompositionMode parse_composition_mode(const std::string& name) {
  if (name == "dyadSum") return CompositionMode::DyadSum;
  if (name == "rankKSum") return CompositionMode::RankKSum;
  if (name == "rankShift") return CompositionMode::RankShift;
  throw InvalidArgument("unknown composition mode '" + name + "'");
}

double kappa_max_trailing(const DenseMatrix& a, Index split) {
  detail::require_square(a, "kappa_max_trailing");
  if (split < 0 || split >= a.rows()) throw InvalidArgument("kappa_max_trailing: bad split");
  if (detail::is_hermitian(a)) return 1.0;
  const DenseMatrix trailing = a.bottomRightCorner(a.rows() - split, a.rows() - split);
  return std::max(spectral_cond_kappa(a), spectral_cond_kappa(trailing));
}

}  // namespace qsfunm
