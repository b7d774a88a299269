#include "qsfunm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include "qsfunm/bounds.hpp"
#include "qsfunm/contour.hpp"
#include "qsfunm/functions.hpp"
#include "qsfunm/matrix_io.hpp"

namespace qsfunm {

MatrixKind parse_matrix_kind(const std::string& name) {
  if (name == "tridiag" || name == "hermitianTridiagonal") return MatrixKind::HermitianTridiagonal;
  if (name == "hessenberg" || name == "scaledUnitaryHessenberg") {
    return MatrixKind::ScaledUnitaryHessenberg;
  }
  throw InvalidArgument("unknown matrix kind '" + name + "' (use tridiag or hessenberg)");
}

std::string matrix_kind_name(MatrixKind kind) {
  return kind == MatrixKind::HermitianTridiagonal ? "tridiag" : "hessenberg";
}

DenseMatrix gen_hermitian_tridiagonal(Index m, std::uint64_t seed) {
  if (m < 2) throw InvalidArgument("gen_hermitian_tridiagonal: m must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd diag(m), sub(m - 1);
  for (Index i = 0; i < m; ++i) diag(i) = gauss(rng);
  for (Index i = 0; i < m - 1; ++i) sub(i) = gauss(rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(m - 1);
  DenseMatrix a = DenseMatrix::Zero(m, m);
  if (!(hi > lo)) return a;
  const double c = (hi + lo) / 2.0;
  const double s = (0.75 - 1e-10) * 2.0 / (hi - lo);
  for (Index i = 0; i < m; ++i) a(i, i) = (diag(i) - c) * s;
  for (Index i = 0; i < m - 1; ++i) {
    a(i + 1, i) = sub(i) * s;
    a(i, i + 1) = sub(i) * s;
  }
  return a;
}

DenseMatrix gen_scaled_unitary_hessenberg(Index m, std::uint64_t seed) {
  if (m < 2) throw InvalidArgument("gen_scaled_unitary_hessenberg: m must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd g(m, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) g(i, j) = gauss(rng);
  }
  Eigen::MatrixXd h = Eigen::HessenbergDecomposition<Eigen::MatrixXd>(g).matrixH();
  // Givens QR keeps Q exactly upper Hessenberg: Q = G_0^T G_1^T ... G_{m-2}^T.
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(m, m);
  for (Index k = 0; k + 1 < m; ++k) {
    Eigen::JacobiRotation<double> rot;
    rot.makeGivens(h(k, k), h(k + 1, k));
    h.applyOnTheLeft(k, k + 1, rot.adjoint());
    q.applyOnTheRight(k, k + 1, rot);
  }
  for (Index k = 0; k < m; ++k) {
    if (h(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  return (0.75 * q).cast<Complex>();
}

DenseMatrix generate_matrix(MatrixKind kind, Index m, std::uint64_t seed) {
  return kind == MatrixKind::HermitianTridiagonal ? gen_hermitian_tridiagonal(m, seed)
                                                  : gen_scaled_unitary_hessenberg(m, seed);
}

void ExperimentConfig::validate() const {
  if (m < 2 || m % 2 != 0) throw InvalidArgument("experiment: m must be even and >= 2");
  if (trials < 1) throw InvalidArgument("experiment: trials must be >= 1");
  if (lmax < 1 || lmax > m / 2) throw InvalidArgument("experiment: lmax must lie in [1, m/2]");
  if (functionName != "exp" && functionName != "log_shift4" && functionName != "sqrt_shift4") {
    throw InvalidArgument("experiment: function must be exp, log_shift4 or sqrt_shift4");
  }
  if (!(contourRadius > 0.75 && contourRadius < 4.0)) {
    throw InvalidArgument("experiment: contour radius must lie in (0.75, 4)");
  }
}

long ExperimentResult::violations(double slack) const {
  return static_cast<long>(std::count_if(rows.begin(), rows.end(), [&](const ExperimentRow& r) {
    return r.sigma > r.bound + slack;
  }));
}

void ExperimentResult::write_csv(std::ostream& os) const {
  os << "trial,l,sigma_l,bound_l\n";
  for (const auto& r : rows) {
    os << r.trial << ',' << r.l << ',' << format_real(r.sigma) << ',' << format_real(r.bound)
       << '\n';
  }
}

ExperimentResult run_decay_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& fn = lookup_function(cfg.functionName);
  const Index half = cfg.m / 2;
  ContourSpec spec;
  spec.radius = cfg.contourRadius;
  spec.assumeSpectrumInside = true;  // generators confine the spectrum to radius 3/4

  ExperimentResult out;
  for (long trial = 0; trial < cfg.trials; ++trial) {
    const DenseMatrix a = generate_matrix(cfg.kind, cfg.m, cfg.seed + static_cast<std::uint64_t>(trial));
    const DenseMatrix fa = funm_dense_oracle(a, fn.value);

    DenseMatrix fc;
    if (cfg.crossCheck == CrossCheckBackend::Dense) {
      fc = contour_adaptive(fn.value, a, spec).result;
    } else {
      const HodlrMatrixC h = hodlr_from_dense(a);
      fc = hodlr_to_dense(contour_adaptive(fn.value, h, spec).result);
    }
    const double rel = norm2(fa - fc) / norm2(fa);
    out.crossCheckErrors.push_back(rel);
    if (!(rel <= cfg.crossCheckTolerance)) {
      throw ExperimentIntegrity("trial " + std::to_string(trial) +
                                ": oracle and contour results differ by " + format_real(rel) +
                                " (relative), threshold " + format_real(cfg.crossCheckTolerance));
    }

    const RealVector sigma = singular_values(fa.bottomLeftCorner(cfg.m - half, half));

    DecayBoundParams p;
    p.enclosure = cfg.kind == MatrixKind::HermitianTridiagonal ? enclosure_interval(0.75)
                                                               : enclosure_disc(0.75);
    p.function = function_meta(fn, 0.0, 1.0);
    p.k = 1;
    p.kappaMax = kappa_max_trailing(a, half);
    p.normShifted = norm2(a);
    const BoundCurve curve(p);
    for (long l = 1; l <= cfg.lmax; ++l) {
      out.rows.push_back({trial, l, sigma(l - 1), curve.value(l)});
    }
  }
  return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<ExpSinRow> run_expsin_benchmark(const ExpSinConfig& cfg) {
  if (cfg.sizes.empty()) throw InvalidArgument("bench-expsin: sizes must be nonempty");
  if (cfg.repeats < 1) throw InvalidArgument("bench-expsin: repeats must be >= 1");
  const auto& fsum = lookup_function("exp_over_sin");
  const ScalarFunction fexp = [](Complex z) { return std::exp(z); };
  const ScalarFunction fsin = [](Complex z) { return std::sin(z); };

  ContourSpec spec;
  spec.radius = cfg.contourRadius > 0.0 ? cfg.contourRadius : std::sqrt(0.75 * std::numbers::pi);
  spec.assumeSpectrumInside = true;
  if (!(spec.radius > 0.75 && spec.radius < std::numbers::pi)) {
    throw InvalidArgument("bench-expsin: radius must separate the spectrum from +-pi");
  }
  const auto poles = fsum.polesWithin(spec.center, spec.radius);

  std::vector<ExpSinRow> rows;
  for (Index m : cfg.sizes) {
    const DenseMatrix a = gen_hermitian_tridiagonal(m, cfg.seed);
    const DenseMatrix oracle = funm_dense_oracle(a, fsum.value);
    const double oracleNorm = norm2(oracle);
    const HodlrMatrixC h = hodlr_from_dense(a, cfg.hodlr);

    ExpSinRow row;
    row.size = m;
    std::vector<double> tInv, tSum;
    HodlrMatrixC xInv, xSum;
    for (int rep = 0; rep < cfg.repeats; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      const auto e = contour_adaptive(fexp, h, spec, cfg.hodlr);
      const auto s = contour_adaptive(fsin, h, spec, cfg.hodlr);
      xInv = hodlr_mul(e.result, hodlr_inverse(s.result, cfg.hodlr), cfg.hodlr);
      tInv.push_back(seconds_since(t0));
      row.resolventsInv = e.resolventEvaluations + s.resolventEvaluations + 1;

      t0 = std::chrono::steady_clock::now();
      const auto ps = funm_with_poles(fsum.value, poles, h, spec, cfg.hodlr);
      xSum = ps.result;
      tSum.push_back(seconds_since(t0));
      row.resolventsSum = ps.integral.resolventEvaluations + static_cast<long>(poles.size());
    }
    const DenseMatrix dInv = hodlr_to_dense(xInv);
    const DenseMatrix dSum = hodlr_to_dense(xSum);
    row.tInv = median(tInv);
    row.tSum = median(tSum);
    row.resInv = norm2(dInv - oracle) / oracleNorm;
    row.resSum = norm2(dSum - oracle) / oracleNorm;
    row.mutual = norm2(dInv - dSum) / oracleNorm;
    rows.push_back(row);
  }
  return rows;
}

void write_expsin_csv(std::ostream& os, const std::vector<ExpSinRow>& rows) {
  os << "size,t_inv,res_inv,t_sum,res_sum,nResolvents_inv,nResolvents_sum\n";
  for (const auto& r : rows) {
    os << r.size << ',' << format_real(r.tInv) << ',' << format_real(r.resInv) << ','
       << format_real(r.tSum) << ',' << format_real(r.resSum) << ',' << r.resolventsInv << ','
       << r.resolventsSum << '\n';
  }
}

}  // namespace qsfunm
