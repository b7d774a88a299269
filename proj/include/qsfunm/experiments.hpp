#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qsfunm/dense.hpp"
#include "qsfunm/hodlr.hpp"

namespace qsfunm {

enum class MatrixKind { HermitianTridiagonal, ScaledUnitaryHessenberg };

MatrixKind parse_matrix_kind(const std::string& name);
std::string matrix_kind_name(MatrixKind kind);

/// Real symmetric tridiagonal with N(0,1) entries, shifted and scaled so its
/// spectrum fills [-3/4 + 1e-10, 3/4 - 1e-10]. A degenerate spectrum yields
/// the zero matrix.
DenseMatrix gen_hermitian_tridiagonal(Index m, std::uint64_t seed);

/// 3/4 times the unitary factor of the QR factorization of the Hessenberg
/// form of an N(0,1) matrix; R is given a positive diagonal.
DenseMatrix gen_scaled_unitary_hessenberg(Index m, std::uint64_t seed);

DenseMatrix generate_matrix(MatrixKind kind, Index m, std::uint64_t seed);

enum class CrossCheckBackend { Dense, Hodlr };

struct ExperimentConfig {
  MatrixKind kind = MatrixKind::HermitianTridiagonal;
  std::string functionName = "exp";
  Index m = 256;
  long trials = 10;
  std::uint64_t seed = 1;
  long lmax = 20;
  CrossCheckBackend crossCheck = CrossCheckBackend::Hodlr;
  double crossCheckTolerance = 1e-9;
  double contourRadius = 2.0;

  void validate() const;
};

struct ExperimentRow {
  long trial = 0;
  long l = 0;
  double sigma = 0.0;
  double bound = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<double> crossCheckErrors;  // per trial, relative 2-norm

  long violations(double slack = 1e-12) const;
  void write_csv(std::ostream& os) const;
};

/// Per trial (seed + trial): f(A) by the dense oracle and by contour
/// quadrature, singular values of the block (m/2.., ..m/2) and the
/// R-optimized decay bound for l = 1..lmax.
ExperimentResult run_decay_experiment(const ExperimentConfig& cfg);

struct ExpSinRow {
  Index size = 0;
  double tInv = 0.0;
  double resInv = 0.0;
  double tSum = 0.0;
  double resSum = 0.0;
  long resolventsInv = 0;
  long resolventsSum = 0;
  double mutual = 0.0;  // relative difference between the two results
};

struct ExpSinConfig {
  std::vector<Index> sizes{128, 256};
  std::uint64_t seed = 1;
  int repeats = 5;
  HodlrConfig hodlr{};
  double contourRadius = 0.0;  // 0 picks sqrt(3 pi / 4)
};

/// e^A (sin A)^{-1} two ways on HODLR arguments: "inv" integrates e^z and
/// sin z separately and inverts, "sum" integrates e^z / sin z once and adds
/// the pole correction A^{-1}. Times are medians over the repeats.
std::vector<ExpSinRow> run_expsin_benchmark(const ExpSinConfig& cfg);
void write_expsin_csv(std::ostream& os, const std::vector<ExpSinRow>& rows);

}  // namespace qsfunm
