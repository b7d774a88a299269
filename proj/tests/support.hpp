#pragma once

#include <random>

#include "qsfunm/dense.hpp"
#include "qsfunm/hodlr.hpp"

namespace qsfunm::testing {

inline DenseMatrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

inline DenseMatrix random_hermitian(Index m, std::mt19937_64& rng) {
  const DenseMatrix g = gaussian(m, m, rng);
  return 0.5 * (g + g.adjoint());
}

/// Tridiagonal plus rank-r perturbations in both off-diagonal corners of
/// every HODLR level would be expensive to build; a global low-rank term
/// keeps every off-diagonal block at rank <= r + 1.
inline DenseMatrix random_quasiseparable(Index m, Index r, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix a = DenseMatrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) a(i, i) = Complex(g(rng), g(rng));
  for (Index i = 0; i + 1 < m; ++i) {
    a(i + 1, i) = Complex(g(rng), g(rng));
    a(i, i + 1) = Complex(g(rng), g(rng));
  }
  if (r > 0) a += gaussian(m, r, rng) * gaussian(m, r, rng).adjoint() / static_cast<double>(m);
  return a;
}

inline double rel_err(const DenseMatrix& got, const DenseMatrix& want) {
  const double n = norm2(want);
  return norm2(got - want) / (n > 0.0 ? n : 1.0);
}

/// p(A) = sum_k c_k A^k by repeated multiplication, c_0 first.
inline DenseMatrix poly_direct(const DenseMatrix& a, const std::vector<Complex>& c) {
  DenseMatrix out = DenseMatrix::Zero(a.rows(), a.cols());
  DenseMatrix pw = DenseMatrix::Identity(a.rows(), a.cols());
  for (const Complex& ck : c) {
    out += ck * pw;
    pw = pw * a;
  }
  return out;
}

/// e^A by scaling and squaring of a Taylor series; independent of any
/// eigendecomposition.
inline DenseMatrix expm_taylor(const DenseMatrix& a) {
  const double n = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (n / std::pow(2.0, squarings) > 0.25) ++squarings;
  const DenseMatrix b = a / std::pow(2.0, squarings);
  DenseMatrix out = DenseMatrix::Identity(a.rows(), a.cols());
  DenseMatrix term = out;
  for (int k = 1; k <= 30; ++k) {
    term = term * b / static_cast<double>(k);
    out += term;
  }
  for (int s = 0; s < squarings; ++s) out = out * out;
  return out;
}

inline std::vector<Complex> exp_taylor_coeffs(int s) {
  // a_n = 1/n!, n = 1..s
  std::vector<Complex> c(static_cast<std::size_t>(s));
  double f = 1.0;
  for (int n = 1; n <= s; ++n) {
    f /= n;
    c[n - 1] = f;
  }
  return c;
}

}  // namespace qsfunm::testing

namespace qsfunm::testing {

/// 5I + D + T + L with |D| <= 1, tridiagonal couplings T of modulus <= 0.5
/// and a rank-r term L with ||L||_2 <= 0.5. Then ||A - 5I||_2 < 3, so
/// sigma_min >= 2 and cond_2 <= 4 without any dense factorization.
inline DenseMatrix well_conditioned_qs(Index m, Index r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto disc = [&](double radius) {
    Complex z;
    do z = Complex(u(rng), u(rng));
    while (std::abs(z) > 1.0);
    return radius * z;
  };
  DenseMatrix a = DenseMatrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) a(i, i) = 5.0 + disc(1.0);
  for (Index i = 0; i + 1 < m; ++i) {
    a(i + 1, i) = disc(0.5);
    a(i, i + 1) = disc(0.5);
  }
  if (r > 0) {
    const DenseMatrix l = gaussian(m, r, rng), v = gaussian(m, r, rng);
    a += 0.5 * l * v.adjoint() / (l.norm() * v.norm());
  }
  return a;
}

inline constexpr double kWellConditionedCond = 4.0;

}  // namespace qsfunm::testing

namespace qsfunm::testing {

/// (1/2 pi i) closed integral of g over |z - c| = rho by an N-point
/// trapezoidal rule; for a residue at c of a function holomorphic on a
/// larger annulus this converges geometrically.
template <typename G>
Complex circle_integral(G&& g, Complex c, double rho, int n = 256) {
  Complex acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const Complex w = std::polar(rho, 2.0 * 3.14159265358979323846 * k / n);
    acc += w * g(c + w);
  }
  return acc / static_cast<double>(n);
}

}  // namespace qsfunm::testing
