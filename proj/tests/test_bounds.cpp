#include <doctest.h>

#include <numbers>
#include <sstream>

#include "qsfunm/bounds.hpp"
#include "qsfunm/experiments.hpp"
#include "support.hpp"

using namespace qsfunm;
using qsfunm::testing::gaussian;

namespace {

constexpr double kPi = std::numbers::pi;

/// Hermitian with eigenvalues uniform in [-a, a] and random eigenvectors.
DenseMatrix hermitian_in_interval(Index m, double a, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-a, a);
  const DenseMatrix q = householder_qr(gaussian(m, m, rng)).q;
  DenseVector ev(m);
  for (Index i = 0; i < m; ++i) ev(i) = u(rng);
  return q * ev.asDiagonal() * q.adjoint();
}

/// Lambda straight from its definition, minimized over a plain uniform grid.
double lambda_reference(double rho, double rA, double v, double R, double a, bool interval,
                        int points) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i < points; ++i) {
    const double r = rho + (rA - rho) * static_cast<double>(i) / points;
    const double level = interval ? r + a * a / (4.0 * r) : r;
    const double delta = std::max(1.0 / R, level);
    const double g = 1.0 / (delta * (1.0 - delta * delta) * (r / rho - 1.0) *
                            std::sqrt(1.0 - rho * rho / (r * r)));
    best = std::min(best, g);
  }
  const double q = rho / (R * rA);
  return v * v / (kPi * kPi * (R - 1.0) * (1.0 - rho / rA) * std::sqrt(1.0 - q * q)) * best;
}

std::vector<Complex> truncated_exp(int s, double scale = 1.0) {
  std::vector<Complex> c(s);
  double f = 1.0;
  for (int n = 1; n <= s; ++n) {
    f *= scale / n;
    c[n - 1] = f;
  }
  return c;
}

DecayBoundParams base_params(const char* fn = "exp") {
  DecayBoundParams p;
  p.enclosure = enclosure_interval(0.75);
  p.function = function_meta(lookup_function(fn));
  p.normShifted = 0.75;
  return p;
}

}  // namespace

TEST_CASE("enclosure_interval examples") {
  const auto e = enclosure_interval(0.6);
  CHECK(e.rho == doctest::Approx(0.3));
  CHECK(e.rOuter == doctest::Approx(0.9));
  CHECK(e.rOuter / e.rho == doctest::Approx(3.0));
  CHECK(e.totalRotation == doctest::Approx(2.0 * kPi));
  for (double a : {0.1, 0.6, 0.75, 0.99, 1.0 - 1e-9}) {
    const auto ea = enclosure_interval(a);
    CHECK(std::abs(ea.deltaOf(ea.rOuter) - 1.0) <= 2 * kUnitRoundoff);
    CHECK(std::abs(ea.alpha() - std::log((1.0 + std::sqrt(1.0 - a * a)) / a)) <= 4 * kUnitRoundoff);
    // the level curve through r is an ellipse with semi-axes r +- a^2/(4r)
    CHECK(ea.deltaOf(0.5 * (ea.rho + ea.rOuter)) < 1.0);
  }
  CHECK(enclosure_interval(1.0 - 1e-12).rOuter / enclosure_interval(1.0 - 1e-12).rho ==
        doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS(enclosure_interval(0.0), InvalidArgument);
  CHECK_THROWS_AS(enclosure_interval(1.0), InvalidArgument);
}

TEST_CASE("enclosure_disc examples") {
  const auto e = enclosure_disc(0.75);
  CHECK(e.alpha() == doctest::Approx(std::log(4.0 / 3.0)));
  CHECK(e.deltaOf(0.8) == 0.8);
  CHECK(enclosure_disc(1e-12).alpha() > 25.0);
  CHECK_THROWS_AS(enclosure_disc(1.5), InvalidArgument);
}

TEST_CASE("numerical range enclosure covers the spectrum and lies in a unit-disc hull") {
  std::mt19937_64 rng(1);
  const DenseMatrix a = gen_scaled_unitary_hessenberg(40, 3);
  const auto e = enclosure_numerical_range(a, 128);
  CHECK(e.kind == RegionKind::HullDisc);
  const DenseVector ev = eigenvalues(a);
  for (Index i = 0; i < ev.size(); ++i) {
    CHECK(std::abs(ev(i) - e.hullCenter) <= e.rho + 1e-9);
  }
  CHECK(e.rOuter == doctest::Approx(1.0 - std::abs(e.hullCenter)));
  CHECK_THROWS_AS(enclosure_numerical_range(DenseMatrix(DenseMatrix::Identity(3, 3)), 64), InvalidGeometry);
  (void)rng;
}

TEST_CASE("smallest enclosing disc") {
  const Disc d = smallest_enclosing_disc({Complex(-1, 0), Complex(1, 0), Complex(0, 0.5)});
  CHECK(std::abs(d.center) < 1e-15);
  CHECK(d.radius == doctest::Approx(1.0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<Complex> pts;
  for (int i = 0; i < 300; ++i) pts.emplace_back(g(rng), g(rng));
  const Disc e = smallest_enclosing_disc(pts);
  int onBoundary = 0;
  for (const auto& p : pts) {
    CHECK(std::abs(p - e.center) <= e.radius * (1.0 + 1e-12));
    if (std::abs(p - e.center) >= e.radius * (1.0 - 1e-9)) ++onBoundary;
  }
  CHECK(onBoundary >= 2);
}

TEST_CASE("lambda_factor examples") {
  const auto d = enclosure_disc(0.75);
  SUBCASE("quadratic in V") {
    Enclosure half = d;
    half.totalRotation = d.totalRotation / 2.0;
    CHECK(lambda_factor(half, 2.0) == doctest::Approx(lambda_factor(d, 2.0) / 4.0).epsilon(1e-12));
  }
  SUBCASE("blows up as R -> 1") {
    CHECK(lambda_factor(d, 1.0 + 1e-8) > 1e6 * lambda_factor(d, 2.0));
    CHECK_THROWS_AS(lambda_factor(d, 1.0), InvalidArgument);
  }
  SUBCASE("agrees with a 10^6-point reference grid") {
    const double ref = lambda_reference(0.75, 1.0, 2.0 * kPi, 2.0, 0.0, false, 1000000);
    CHECK(lambda_factor(d, 2.0) == doctest::Approx(ref).epsilon(1e-3));
  }
}

TEST_CASE("lambda_factor grid minimum within 1e-3 of the reference grid") {
  for (double R : {1.1, 1.5, 3.0, 10.0, 1e3}) {
    for (double a : {0.3, 0.75, 0.95}) {
      CAPTURE(R);
      CAPTURE(a);
      const auto e = enclosure_interval(a);
      CHECK(lambda_factor(e, R) ==
            doctest::Approx(lambda_reference(e.rho, e.rOuter, 2.0 * kPi, R, a, true, 1000000)).epsilon(1e-3));
      const auto d = enclosure_disc(a);
      CHECK(lambda_factor(d, R) ==
            doctest::Approx(lambda_reference(a, 1.0, 2.0 * kPi, R, 0.0, false, 1000000)).epsilon(1e-3));
    }
  }
}

TEST_CASE("FunctionMeta") {
  const auto fm = function_meta(lookup_function("exp"));
  CHECK(fm.entire());
  CHECK(fm.log_max_modulus(3.0) == doctest::Approx(3.0 + std::log(1.01)));
  const auto lg = function_meta(lookup_function("log_shift4"), 0.0, 2.0);
  CHECK(lg.admissibleRmax == doctest::Approx(4.0));
  CHECK_FALSE(lg.entire());
}

TEST_CASE("offdiag_decay_bound reduces to the closed form at t = 0, k = 1") {
  auto p = base_params();
  const double R = 3.0;
  const auto b = offdiag_decay_bound(p, R);
  const auto& e = p.enclosure;
  const double gamma = std::exp(R) * 1.01 * 1.0 * 0.75 * lambda_factor(e, R) * e.rho /
                       (R * e.rOuter - e.rho);
  CHECK(b.gamma() == doctest::Approx(gamma).epsilon(1e-10));
  CHECK(b.alpha == doctest::Approx(std::log(e.rOuter / e.rho)));
  CHECK(b.alphaPrime == doctest::Approx(std::log(R)));
  for (long l = 1; l <= 10; ++l) {
    CHECK(b(l) == doctest::Approx(gamma * std::exp(-(b.alpha + b.alphaPrime) * l)).epsilon(1e-10));
  }
}

TEST_CASE("offdiag_decay_bound structure") {
  auto p = base_params();
  const auto b1 = offdiag_decay_bound(p, 2.5);
  p.k = 2;
  const auto b2 = offdiag_decay_bound(p, 2.5);
  CHECK(b2.rate() == doctest::Approx(b1.rate() / 2.0));
  CHECK(b2.gamma() == doctest::Approx(2.0 * b1.gamma()));

  p = base_params();
  p.t = 2;
  p.k = 3;
  const auto bt = offdiag_decay_bound(p, 2.5);
  for (long l = 0; l <= 6; ++l) CHECK(bt(l) == doctest::Approx(bt.gamma()));
  CHECK(bt(7) < bt.gamma());
  CHECK(bt(9) == doctest::Approx(bt.gamma() * std::exp(-bt.rate() * 3.0)));

  p = base_params();
  p.kappaMax = 3.0;
  CHECK(offdiag_decay_bound(p, 2.5).gamma() == doctest::Approx(9.0 * b1.gamma()));
  p.crouzeixC = kCrouzeixDefault;
  CHECK(offdiag_decay_bound(p, 2.5).gamma() ==
        doctest::Approx(kCrouzeixDefault * kCrouzeixDefault * b1.gamma()));

  p = base_params();
  p.jordanShift = 2;
  const auto bj = offdiag_decay_bound(p, 2.5);
  CHECK(bj.logGamma == doctest::Approx(b1.logGamma + 2.0 + 4.0 * b1.alpha));

  p = base_params();
  CHECK_THROWS_AS(offdiag_decay_bound(p, 0.5), InvalidArgument);
  p.kappaMax = 0.5;
  CHECK_THROWS_AS(offdiag_decay_bound(p, 2.0), InvalidArgument);
  auto q = base_params("log_shift4");
  CHECK_THROWS_AS(offdiag_decay_bound(q, 5.0), InvalidArgument);
}

TEST_CASE("optimize_R examples") {
  const auto p = base_params();
  const auto small = optimize_R(p, 1);
  const auto large = optimize_R(p, 20);
  CHECK(large.R > small.R);

  auto q = base_params("log_shift4");
  q.function.innerRadius = 2.0;  // admissibleRmax = 2 R'
  for (long l : {1L, 5L, 20L}) CHECK(optimize_R(q, l).R <= 4.0);

  for (const auto& params : {p, q}) {
    const auto grid = r_grid(params.function);
    REQUIRE(grid.size() == 256);
    for (long l : {1L, 7L, 20L}) {
      const auto best = optimize_R(params, l);
      CHECK(best.value <= offdiag_decay_bound(params, grid.front())(l));
      CHECK(best.value <= offdiag_decay_bound(params, grid.back())(l));
    }
  }
  const auto grid = r_grid(p.function);
  CHECK(grid.front() == doctest::Approx(1.0 + 1e-6));
  CHECK(grid.back() == doctest::Approx(std::exp(30.0)));
}

TEST_CASE("bound CSV") {
  const BoundCurve curve(base_params());
  std::ostringstream os;
  write_bound_csv(os, curve, 5);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "l,bound");
  double prev = std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(is, line)) {
    const double v = std::stod(line.substr(line.find(',') + 1));
    CHECK(v < prev);
    prev = v;
    ++rows;
  }
  CHECK(rows == 5);
  std::vector<double> sig{1.0, 0.5};
  std::ostringstream os2;
  write_bound_csv(os2, curve, 2, &sig);
  CHECK(os2.str().rfind("l,bound,sigma_l\n", 0) == 0);
}

TEST_CASE("off-diagonal singular values of e^A stay below the bound at m = 1000") {
  // 2 trials at the full size; the 10-trial sweep at m = 256 is part of the
  // acceptance run
  const auto& f = lookup_function("exp");
  for (std::uint64_t trial = 0; trial < 2; ++trial) {
    const DenseMatrix a = gen_hermitian_tridiagonal(1000, 77 + trial);
    DecayBoundParams p;
    p.enclosure = enclosure_interval(0.75);
    p.function = function_meta(f);
    p.normShifted = norm2(a);
    const BoundCurve curve(p);
    const DenseMatrix fa = funm_dense_oracle(a, f.value);
    const RealVector s = singular_values(DenseMatrix(fa.bottomLeftCorner(500, 500)));
    for (long l = 1; l <= 20; ++l) CHECK(s(l - 1) <= curve.value(l) + 1e-12);
  }
}

TEST_CASE("krylov_matrix examples") {
  std::mt19937_64 rng(3);
  const DenseMatrix a = gaussian(5, 5, rng);
  const DenseVector b = gaussian(5, 1, rng).col(0);
  CHECK(krylov_matrix(a, b, 1) == DenseMatrix(b));
  const DenseMatrix k = krylov_matrix(DenseMatrix(DenseMatrix::Identity(5, 5)), b, 4);
  for (Index j = 0; j < 4; ++j) CHECK(k.col(j) == b);
  DenseMatrix shift = DenseMatrix::Zero(5, 5);
  for (Index i = 0; i + 1 < 5; ++i) shift(i + 1, i) = 1.0;
  const DenseMatrix e = krylov_matrix(shift, DenseVector(DenseVector::Unit(5, 0)), 4);
  CHECK(e == DenseMatrix(DenseMatrix::Identity(5, 4)));
  CHECK_THROWS_AS(krylov_matrix(a, DenseVector(DenseVector::Zero(4)), 2), DimensionMismatch);
}

TEST_CASE("horner_matrix examples") {
  std::mt19937_64 rng(4);
  const DenseMatrix a = gaussian(6, 6, rng);
  const DenseVector b = gaussian(6, 1, rng).col(0);
  CHECK(horner_matrix(a, b, {Complex(2.0)}) == DenseMatrix(2.0 * b));

  const DenseMatrix unit = horner_matrix(a, b, {0.0, 0.0, 0.0, 1.0});
  // column j = A^{j-1} b
  const DenseMatrix k = krylov_matrix(a, b, 4);
  CHECK((unit - k).norm() <= 1e-13 * k.norm());

  const auto c = truncated_exp(8);
  const DenseVector one = DenseVector::Ones(1);
  const DenseMatrix h = horner_matrix(DenseMatrix(DenseMatrix::Constant(1, 1, 0.5)), one, c);
  // column j (1-based) = sum_{n=0}^{j-1} a_{s-j+1+n} 0.5^n
  for (int j = 1; j <= 8; ++j) {
    Complex want = 0.0;
    for (int n = 0; n <= j - 1; ++n) want += c[8 - j + n] * std::pow(0.5, n);
    CHECK(std::abs(h(0, j - 1) - want) <= 1e-15);
  }
}

TEST_CASE("offdiag_via_krylov_horner examples") {
  std::mt19937_64 rng(5);
  DenseMatrix a = qsfunm::testing::random_quasiseparable(32, 0, rng);
  a /= 2.0 * norm2(a);
  const Index p = 16;
  const DenseMatrix c = a.bottomLeftCorner(16, 16);

  const DenseMatrix one = offdiag_via_krylov_horner(a, p, {Complex(1.5)});
  CHECK((one - 1.5 * c).norm() <= 1e-14 * c.norm());

  for (int n = 1; n <= 6; ++n) {
    std::vector<Complex> en(n, 0.0);
    en[n - 1] = 1.0;
    DenseMatrix power = DenseMatrix::Identity(32, 32);
    for (int i = 0; i < n; ++i) power = power * a;
    const DenseMatrix want = power.bottomLeftCorner(16, 16);
    CHECK((offdiag_via_krylov_horner(a, p, en) - want).norm() <= 1e-13 * std::max(want.norm(), 1e-300));
  }

  const auto ce = truncated_exp(20);
  std::vector<Complex> c0{0.0};
  c0.insert(c0.end(), ce.begin(), ce.end());
  const DenseMatrix want = qsfunm::testing::poly_direct(a, c0).bottomLeftCorner(16, 16);
  CHECK((offdiag_via_krylov_horner(a, p, ce) - want).norm() <= 1e-13 * want.norm());

  const DenseMatrix g = gaussian(32, 32, rng);
  CHECK_THROWS_AS(offdiag_via_krylov_horner(g / (2 * norm2(g)), p, ce, Index(1)), InvalidArgument);
  CHECK_THROWS_AS(offdiag_via_krylov_horner(a, 0, ce), InvalidArgument);
}

TEST_CASE("Krylov/Horner identity is exact for general blocks") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> sd(1, 20), pd(4, 28);
  for (int t = 0; t < 20; ++t) {
    DenseMatrix a = gaussian(32, 32, rng);
    a /= 2.0 * norm2(a);
    const int s = sd(rng);
    std::vector<Complex> coeffs = truncated_exp(s);
    for (auto& ci : coeffs) ci *= Complex(1.0, 0.3 * t);
    std::vector<Complex> c0{0.0};
    c0.insert(c0.end(), coeffs.begin(), coeffs.end());
    const Index p = pd(rng);
    const DenseMatrix want = qsfunm::testing::poly_direct(a, c0).bottomLeftCorner(32 - p, p);
    CHECK((offdiag_via_krylov_horner(a, p, coeffs) - want).norm() <= 1e-12 * want.norm());
  }
}

TEST_CASE("r_factor_bound_krylov examples and dominance") {
  const auto e = enclosure_interval(0.75);
  const double r = 0.5 * (e.rho + e.rOuter);
  const double b0 = r_factor_bound_krylov(e, 1.0, 1.0, r, 0, 1);
  CHECK(b0 == doctest::Approx(2.0 * kPi / (kPi * (1.0 - e.rho / r))));
  const double l1 = std::log(r_factor_bound_krylov(e, 1.0, 1.0, r, 3, 2));
  const double l2 = std::log(r_factor_bound_krylov(e, 1.0, 1.0, r, 4, 2));
  CHECK(l2 - l1 == doctest::Approx(std::log(e.rho / r)));
  CHECK_THROWS_AS(r_factor_bound_krylov(e, 1.0, 1.0, e.rho, 0, 1), InvalidArgument);

  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    const DenseMatrix a = hermitian_in_interval(64, 0.75, rng);
    const DenseVector b = gaussian(64, 1, rng).col(0);
    for (Index n : {10, 30, 64}) {
      const DenseMatrix u = krylov_matrix(a, b, n);
      const DenseMatrix rr = householder_qr(u).r;
      const double slack = 1e-13 * u.norm();
      for (double rv : {e.rho * 1.05, r, e.rOuter * 0.98}) {
        for (Index j = 1; j <= n; ++j) {
          for (Index i = 0; i < j && i < 64; ++i) {
            REQUIRE(std::abs(rr(i, j - 1)) <= r_factor_bound_krylov(e, 1.0, b.norm(), rv, i, j) + slack);
          }
        }
      }
    }
  }
}

TEST_CASE("r_factor_bound_horner examples and dominance") {
  const auto e = enclosure_interval(0.75);
  const double rhoHat = 0.4;
  const double bs = r_factor_bound_horner(e, 1.0, 1.0, 1.0, rhoHat, 10, 3, 10);
  const double c = rhoHat * 2.0 * kPi / (kPi * (1.0 - rhoHat) * (1.0 - e.rho / e.rOuter));
  CHECK(bs == doctest::Approx(c * std::pow(e.rho / e.rOuter, 3) * std::pow(rhoHat, 3)));
  CHECK(r_factor_bound_horner(e, 1.0, 1.0, 1.0, rhoHat, 10, 3, 9) ==
        doctest::Approx(bs * rhoHat));
  CHECK_THROWS_AS(r_factor_bound_horner(e, 1.0, 1.0, 1.0, rhoHat, 10, 3, 11), InvalidArgument);

  // |1/j!| <= gammaHat R^{-j} needs gammaHat >= R^j / j!, so gammaHat = 1
  // would not satisfy the coefficient hypothesis for R > 1
  const auto coeffs = truncated_exp(12);
  CHECK(horner_gamma_hat(coeffs, 0.5) == doctest::Approx(2.0));
  CHECK(horner_gamma_hat(coeffs, 0.25) == doctest::Approx(std::pow(4.0, 3) / 6.0).epsilon(1e-6) );

  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    const DenseMatrix a = hermitian_in_interval(64, 0.75, rng);
    const DenseVector b = gaussian(64, 1, rng).col(0);
    for (double R : {2.0, 4.0}) {
      const double rh = 1.0 / R;
      const double gh = horner_gamma_hat(coeffs, rh);
      const long s = static_cast<long>(coeffs.size());
      const DenseMatrix u = horner_matrix(a, b, coeffs);
      const DenseMatrix rr = householder_qr(u).r;
      const double slack = 1e-13 * u.norm();
      for (long j = 1; j <= s; ++j) {
        for (long i = 0; i < j; ++i) {
          REQUIRE(std::abs(rr(i, j - 1)) <= r_factor_bound_horner(e, 1.0, b.norm(), gh, rh, s, i, j) + slack);
        }
      }
    }
  }
}

TEST_CASE("outer product and tail bounds") {
  const auto e = enclosure_interval(0.75);
  const double R = 2.0;
  const double g = lambda_factor(e, R);
  CHECK(outer_product_sv_bound(e, 1.0, 1.0, 1.0, 1.0, 1.0, R, 0) ==
        doctest::Approx(g * std::exp(-(e.alpha() + std::log(R)))));
  CHECK(tail_sv_bound(1.0, 400, 0.5, 0.3, 0) < 1e-40);
  CHECK(tail_sv_bound(1.0, 10, 0.5, 0.3, 0) > tail_sv_bound(1.0, 40, 0.5, 0.3, 0));
  CHECK_THROWS_AS(tail_sv_bound(1.0, 0, 0.5, 0.3, 0), InvalidArgument);

  // X = K(A1, b1, s) Pi_s H(A2, b2, a)^T with |a_j| <= gammaHat R^{-j}
  std::mt19937_64 rng(9);
  for (int t = 0; t < 5; ++t) {
    const DenseMatrix a1 = hermitian_in_interval(64, 0.75, rng);
    const DenseMatrix a2 = hermitian_in_interval(64, 0.75, rng);
    const DenseVector b1 = gaussian(64, 1, rng).col(0), b2 = gaussian(64, 1, rng).col(0);
    const auto coeffs = truncated_exp(30, 1.0 / R);
    const double gh = horner_gamma_hat(coeffs, 1.0 / R);
    const DenseMatrix x = krylov_matrix(a1, b1, 30) *
                          horner_matrix(a2, b2, coeffs).rowwise().reverse().transpose();
    const RealVector s = singular_values(x);
    for (long l = 1; l <= 20; ++l) {
      CHECK(s(l - 1) <= outer_product_sv_bound(e, 1.0, 1.0, b1.norm(), b2.norm(), gh, R, l) +
                            1e-13 * s(0));
    }
  }
}

TEST_CASE("composition lemmas") {
  SUBCASE("rank shift with k = 0 is the identity") {
    CompositionParams p;
    p.sigmaA = {3.0, 2.0, 1.0};
    p.k = 0;
    p.l = 2;
    CHECK(sv_composition_bound(CompositionMode::RankShift, p) == 2.0);
  }
  SUBCASE("rank-k sum with k = 1 is the dyad constant") {
    CompositionParams p{2.0, 0.7, 1, 4, {}};
    CHECK(sv_composition_bound(CompositionMode::RankKSum, p) ==
          doctest::Approx(sv_composition_bound(CompositionMode::DyadSum, p)));
  }
  SUBCASE("rank shift on 16x16 instances") {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 100; ++t) {
      const Index k = 1 + t % 3;
      const DenseMatrix a = gaussian(16, 16, rng);
      const DenseMatrix b = gaussian(16, k, rng) * gaussian(16, k, rng).adjoint();
      const RealVector sa = singular_values(a), sab = singular_values(DenseMatrix(a + b));
      CompositionParams p;
      p.sigmaA.assign(sa.data(), sa.data() + sa.size());
      p.k = k;
      for (Index j = 1; j + k <= 16; ++j) {
        p.l = j;
        CHECK(sab(j + k - 1) <= sv_composition_bound(CompositionMode::RankShift, p) + 1e-14 * sa(0));
      }
    }
  }
  SUBCASE("dyad and rank-k sums dominate constructed decaying sums") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
      const long k = 1 + t % 3;
      const double gamma = 1.0 + t, alpha = 0.3 + 0.1 * t;
      // A+ = sum_j A_j, rank k, ||A_j|| = gamma e^{-alpha j}
      DenseMatrix sum = DenseMatrix::Zero(40, 40);
      for (int j = 0; j < 40 / static_cast<int>(k); ++j) {
        const auto q1 = householder_qr(gaussian(40, k, rng)).q.leftCols(k);
        const auto q2 = householder_qr(gaussian(40, k, rng)).q.leftCols(k);
        sum += gamma * std::exp(-alpha * j) * q1 * q2.adjoint();
      }
      const RealVector s = singular_values(sum);
      // A = sum_{i=1}^k A_i, sigma_j(A_i) = gamma e^{-alpha j}
      DenseMatrix ks = DenseMatrix::Zero(40, 40);
      for (long i = 0; i < k; ++i) {
        const DenseMatrix u = householder_qr(gaussian(40, 40, rng)).q;
        const DenseMatrix v = householder_qr(gaussian(40, 40, rng)).q;
        RealVector d(40);
        for (Index j = 0; j < 40; ++j) d(j) = gamma * std::exp(-alpha * static_cast<double>(j + 1));
        ks += u * d.cast<Complex>().asDiagonal() * v.adjoint();
      }
      const RealVector sk = singular_values(ks);
      for (long l = 1; l <= 40; ++l) {
        CompositionParams p{gamma, alpha, k, l, {}};
        // measured values bottom out at roundoff, 1e-14 sigma_1
        CHECK(s(l - 1) <= sv_composition_bound(CompositionMode::DyadSum, p) + 1e-14 * s(0));
        CHECK(sk(l - 1) <= sv_composition_bound(CompositionMode::RankKSum, p) + 1e-14 * sk(0));
      }
    }
  }
  CHECK(parse_composition_mode("dyadSum") == CompositionMode::DyadSum);
  CHECK_THROWS_AS(parse_composition_mode("other"), InvalidArgument);
}

TEST_CASE("kappa_max_trailing") {
  CHECK(kappa_max_trailing(gen_hermitian_tridiagonal(32, 1), 16) == 1.0);
  const DenseMatrix h = gen_scaled_unitary_hessenberg(32, 1);
  const double k = kappa_max_trailing(h, 16);
  CHECK(k >= 1.0);
  CHECK(k >= spectral_cond_kappa(DenseMatrix(h.bottomRightCorner(16, 16))));
  // A itself is normal; its trailing block is not
  CHECK(spectral_cond_kappa(h) == doctest::Approx(1.0).epsilon(1e-6));
}
