#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qsfunm/dense.hpp"

namespace qsfunm {

/// Truncation and partitioning parameters of the HODLR format.
struct HodlrConfig {
  double epsilon = kUnitRoundoff;  // relative truncation threshold
  Index mMin = 64;                 // leaf size
  std::optional<Index> maxRank;    // defaults to min(m, 256)

  Index max_rank_for(Index m) const { return maxRank ? *maxRank : std::min<Index>(m, 256); }

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
      throw InvalidArgument("HodlrConfig: epsilon must lie in [0, 1)");
    }
    if (mMin < 1) throw InvalidArgument("HodlrConfig: mMin must be >= 1");
    if (maxRank && *maxRank < 1) throw InvalidArgument("HodlrConfig: maxRank must be >= 1");
  }
};

/// Off-diagonal block stored as left * right^*.
template <typename Scalar>
struct LowRankBlock {
  Matrix<Scalar> left;   // rows x r
  Matrix<Scalar> right;  // cols x r

  LowRankBlock() = default;
  LowRankBlock(Matrix<Scalar> l, Matrix<Scalar> r) : left(std::move(l)), right(std::move(r)) {}

  static LowRankBlock zero(Index rows, Index cols) {
    return {Matrix<Scalar>(rows, 0), Matrix<Scalar>(cols, 0)};
  }

  Index rows() const { return left.rows(); }
  Index cols() const { return right.rows(); }
  Index rank() const { return left.cols(); }

  Matrix<Scalar> to_dense() const {
    if (rank() == 0) return Matrix<Scalar>::Zero(rows(), cols());
    return left * right.adjoint();
  }

  /// Frobenius norm via the r x r Gram matrices.
  double frobenius_norm() const {
    if (rank() == 0) return 0.0;
    const Matrix<Scalar> gl = left.adjoint() * left;
    const Matrix<Scalar> gr = right.adjoint() * right;
    return std::sqrt(std::abs((gl.cwiseProduct(gr.transpose())).sum()));
  }
};

/// Recursive HODLR matrix: either a dense leaf of side <= mMin, or a 2x2
/// split with sizes floor(m/2), ceil(m/2), HODLR diagonal blocks and
/// low-rank off-diagonal blocks. Values are immutable once built; every
/// operation returns a new matrix.
template <typename Scalar>
class HodlrMatrix {
 public:
  HodlrMatrix() = default;

  static HodlrMatrix leaf(Matrix<Scalar> block) {
    if (block.rows() != block.cols()) throw DimensionMismatch("HODLR leaf must be square");
    HodlrMatrix h;
    h.size_ = block.rows();
    h.leaf_ = std::move(block);
    return h;
  }

  static HodlrMatrix branch(HodlrMatrix topLeft, HodlrMatrix bottomRight,
                            LowRankBlock<Scalar> topRight, LowRankBlock<Scalar> bottomLeft) {
    const Index m1 = topLeft.size(), m2 = bottomRight.size();
    if (topRight.rows() != m1 || topRight.cols() != m2 || bottomLeft.rows() != m2 ||
        bottomLeft.cols() != m1) {
      throw DimensionMismatch("HODLR branch: off-diagonal block sizes do not match");
    }
    HodlrMatrix h;
    h.size_ = m1 + m2;
    h.children_.reserve(2);
    h.children_.push_back(std::move(topLeft));
    h.children_.push_back(std::move(bottomRight));
    h.topRight_ = std::move(topRight);
    h.bottomLeft_ = std::move(bottomLeft);
    return h;
  }

  Index size() const { return size_; }
  Index rows() const { return size_; }
  Index cols() const { return size_; }
  bool is_leaf() const { return children_.empty(); }

  const Matrix<Scalar>& dense_block() const { return leaf_; }
  const HodlrMatrix& top_left() const { return children_[0]; }
  const HodlrMatrix& bottom_right() const { return children_[1]; }
  const LowRankBlock<Scalar>& top_right() const { return topRight_; }
  const LowRankBlock<Scalar>& bottom_left() const { return bottomLeft_; }

 private:
  Index size_ = 0;
  Matrix<Scalar> leaf_;
  std::vector<HodlrMatrix> children_;
  LowRankBlock<Scalar> topRight_;
  LowRankBlock<Scalar> bottomLeft_;
};

using HodlrMatrixC = HodlrMatrix<Complex>;

inline Index hodlr_split(Index m) { return m / 2; }

namespace detail {

inline std::string child_path(const std::string& path, const char* tag) {
  return path + "." + tag;
}

/// Roundoff floor below which recompression always discards singular
/// values, independent of epsilon.
inline constexpr double kRecompressionFloor = 8.0 * kUnitRoundoff;

template <typename Scalar>
void check_rank(const LowRankBlock<Scalar>& b, const HodlrConfig& cfg, Index m,
                const std::string& path) {
  const Index cap = cfg.max_rank_for(m);
  if (b.rank() > cap) throw RankOverflow(path, static_cast<long>(b.rank()), static_cast<long>(cap));
}

/// Compresses a dense block with sigma_i > epsilon * sigma_1. A
/// column-pivoted QR first strips trailing columns whose total norm is
/// below epsilon * |r_00| / 2, so exactly structured blocks keep their
/// exact rank and the SVD runs on the k x n factor only.
template <typename Scalar>
LowRankBlock<Scalar> compress_dense(const Matrix<Scalar>& block, const HodlrConfig& cfg, Index m,
                                    const std::string& path) {
  const Index rows = block.rows(), cols = block.cols();
  if (block.size() == 0) return LowRankBlock<Scalar>::zero(rows, cols);
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(block);
  const auto& packed = qr.matrixQR();
  const Index n = std::min(rows, cols);
  const double r00 = std::abs(packed(0, 0));
  if (r00 == 0.0) return LowRankBlock<Scalar>::zero(rows, cols);
  // |r_kk| bounds every remaining column norm, so sqrt(cols - k) |r_kk|
  // bounds the Frobenius norm of the discarded trailing block.
  Index k = n;
  while (k > 1 && std::sqrt(static_cast<double>(cols - k + 1)) * std::abs(packed(k - 1, k - 1)) <=
                      0.5 * cfg.epsilon * r00) {
    --k;
  }
  const Matrix<Scalar> rTop = Matrix<Scalar>(packed.topRows(k).template triangularView<Eigen::Upper>()) *
                              qr.colsPermutation().transpose();
  auto s = truncated_svd(rTop, cfg.epsilon);
  const Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(rows, k);
  LowRankBlock<Scalar> out(q * (s.left * s.singular.asDiagonal()), std::move(s.right));
  check_rank(out, cfg, m, path);
  return out;
}

/// Recompresses left * right^* through QR of both factors and an SVD of the
/// small core. Triplets at or below max(epsilon, floor) * reference are
/// dropped, where reference is an upper estimate of the norm of the exact
/// block (callers pass the sum of the norms of the summands).
template <typename Scalar>
LowRankBlock<Scalar> recompress(const Matrix<Scalar>& left, const Matrix<Scalar>& right,
                                double reference, const HodlrConfig& cfg, Index m,
                                const std::string& path) {
  const Index rows = left.rows(), cols = right.rows();
  if (left.cols() == 0 || rows == 0 || cols == 0) return LowRankBlock<Scalar>::zero(rows, cols);
  const auto ql = thin_qr(left);
  const auto qr = thin_qr(right);
  const Matrix<Scalar> core = ql.r * qr.r.adjoint();
  auto s = detail::full_svd<Scalar>(core);
  const double top = s.singular.size() > 0 ? s.singular(0) : 0.0;
  const double ref = std::max(top, reference);
  const double threshold = std::max(cfg.epsilon, kRecompressionFloor) * ref;
  s = truncate(std::move(s), threshold);
  LowRankBlock<Scalar> out(ql.q * (s.left * s.singular.asDiagonal()), qr.q * s.right);
  check_rank(out, cfg, m, path);
  return out;
}

template <typename Scalar>
LowRankBlock<Scalar> recompress_sum(const std::vector<const LowRankBlock<Scalar>*>& parts,
                                    const HodlrConfig& cfg, Index m, const std::string& path) {
  Index total = 0;
  double reference = 0.0;
  for (const auto* p : parts) {
    total += p->rank();
    reference += p->frobenius_norm();
  }
  const Index rows = parts.front()->rows(), cols = parts.front()->cols();
  Matrix<Scalar> left(rows, total), right(cols, total);
  Index at = 0;
  for (const auto* p : parts) {
    left.middleCols(at, p->rank()) = p->left;
    right.middleCols(at, p->rank()) = p->right;
    at += p->rank();
  }
  return recompress<Scalar>(left, right, reference, cfg, m, path);
}

template <typename Scalar>
void require_same_structure(const HodlrMatrix<Scalar>& a, const HodlrMatrix<Scalar>& b,
                            const char* what) {
  if (a.size() != b.size() || a.is_leaf() != b.is_leaf()) {
    throw DimensionMismatch(std::string(what) +
                            ": HODLR operands have incompatible partitions (sizes " +
                            std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  }
}

template <typename Scalar>
HodlrMatrix<Scalar> from_dense_rec(const Matrix<Scalar>& m, const HodlrConfig& cfg, Index top,
                                   const std::string& path) {
  const Index n = m.rows();
  if (n <= cfg.mMin) return HodlrMatrix<Scalar>::leaf(m);
  const Index m1 = hodlr_split(n), m2 = n - m1;
  auto tl = from_dense_rec<Scalar>(m.topLeftCorner(m1, m1), cfg, top, child_path(path, "TL"));
  auto br = from_dense_rec<Scalar>(m.bottomRightCorner(m2, m2), cfg, top, child_path(path, "BR"));
  auto tr = compress_dense<Scalar>(m.topRightCorner(m1, m2), cfg, top, child_path(path, "TR"));
  auto bl = compress_dense<Scalar>(m.bottomLeftCorner(m2, m1), cfg, top, child_path(path, "BL"));
  return HodlrMatrix<Scalar>::branch(std::move(tl), std::move(br), std::move(tr), std::move(bl));
}

template <typename Scalar>
void to_dense_into(const HodlrMatrix<Scalar>& h, Matrix<Scalar>& out, Index at) {
  const Index n = h.size();
  if (h.is_leaf()) {
    out.block(at, at, n, n) = h.dense_block();
    return;
  }
  const Index m1 = h.top_left().size(), m2 = h.bottom_right().size();
  to_dense_into(h.top_left(), out, at);
  to_dense_into(h.bottom_right(), out, at + m1);
  out.block(at, at + m1, m1, m2) = h.top_right().to_dense();
  out.block(at + m1, at, m2, m1) = h.bottom_left().to_dense();
}

}  // namespace detail

template <typename Derived>
HodlrMatrix<typename Derived::Scalar> hodlr_from_dense(const Eigen::MatrixBase<Derived>& m,
                                                       const HodlrConfig& cfg = {}) {
  using Scalar = typename Derived::Scalar;
  cfg.validate();
  detail::require_square(m, "hodlr_from_dense");
  detail::require_finite(m, "hodlr_from_dense");
  return detail::from_dense_rec<Scalar>(m.derived(), cfg, m.rows(), "root");
}

template <typename Scalar>
Matrix<Scalar> hodlr_to_dense(const HodlrMatrix<Scalar>& h) {
  Matrix<Scalar> out(h.size(), h.size());
  detail::to_dense_into<Scalar>(h, out, 0);
  return out;
}

/// Same partition as from_dense would produce; identity diagonal leaves.
template <typename Scalar = Complex>
HodlrMatrix<Scalar> hodlr_identity(Index m, const HodlrConfig& cfg = {}, Scalar diag = Scalar(1)) {
  if (m <= cfg.mMin) return HodlrMatrix<Scalar>::leaf(diag * Matrix<Scalar>::Identity(m, m));
  const Index m1 = hodlr_split(m), m2 = m - m1;
  return HodlrMatrix<Scalar>::branch(hodlr_identity<Scalar>(m1, cfg, diag),
                                     hodlr_identity<Scalar>(m2, cfg, diag),
                                     LowRankBlock<Scalar>::zero(m1, m2),
                                     LowRankBlock<Scalar>::zero(m2, m1));
}

template <typename Scalar = Complex>
HodlrMatrix<Scalar> hodlr_zero(Index m, const HodlrConfig& cfg = {}) {
  return hodlr_identity<Scalar>(m, cfg, Scalar(0));
}

template <typename Scalar>
Index hodlr_depth(const HodlrMatrix<Scalar>& h) {
  if (h.is_leaf()) return 0;
  return 1 + std::max(hodlr_depth(h.top_left()), hodlr_depth(h.bottom_right()));
}

/// Maximum stored off-diagonal rank over all levels.
template <typename Scalar>
Index hodlr_qsrank(const HodlrMatrix<Scalar>& h) {
  if (h.is_leaf()) return 0;
  return std::max({h.top_right().rank(), h.bottom_left().rank(), hodlr_qsrank(h.top_left()),
                   hodlr_qsrank(h.bottom_right())});
}

/// Y = H * X for a vector or a block of columns.
template <typename Scalar>
Matrix<Scalar> hodlr_matvec(const HodlrMatrix<Scalar>& h, const Matrix<Scalar>& x) {
  if (x.rows() != h.size()) {
    throw DimensionMismatch("hodlr_matvec: operand has " + std::to_string(x.rows()) +
                            " rows, matrix has size " + std::to_string(h.size()));
  }
  if (h.is_leaf()) return h.dense_block() * x;
  const Index m1 = h.top_left().size(), m2 = h.bottom_right().size();
  Matrix<Scalar> y(h.size(), x.cols());
  const auto x1 = x.topRows(m1);
  const auto x2 = x.bottomRows(m2);
  y.topRows(m1) = hodlr_matvec(h.top_left(), Matrix<Scalar>(x1));
  y.bottomRows(m2) = hodlr_matvec(h.bottom_right(), Matrix<Scalar>(x2));
  const auto& tr = h.top_right();
  const auto& bl = h.bottom_left();
  if (tr.rank() > 0) y.topRows(m1).noalias() += tr.left * (tr.right.adjoint() * x2);
  if (bl.rank() > 0) y.bottomRows(m2).noalias() += bl.left * (bl.right.adjoint() * x1);
  return y;
}

template <typename Scalar>
Vector<Scalar> hodlr_matvec(const HodlrMatrix<Scalar>& h, const Vector<Scalar>& x) {
  return hodlr_matvec(h, Matrix<Scalar>(x)).col(0);
}

/// Y = H^* * X.
template <typename Scalar>
Matrix<Scalar> hodlr_adjoint_matvec(const HodlrMatrix<Scalar>& h, const Matrix<Scalar>& x) {
  if (x.rows() != h.size()) throw DimensionMismatch("hodlr_adjoint_matvec: size mismatch");
  if (h.is_leaf()) return h.dense_block().adjoint() * x;
  const Index m1 = h.top_left().size(), m2 = h.bottom_right().size();
  Matrix<Scalar> y(h.size(), x.cols());
  const auto x1 = x.topRows(m1);
  const auto x2 = x.bottomRows(m2);
  y.topRows(m1) = hodlr_adjoint_matvec(h.top_left(), Matrix<Scalar>(x1));
  y.bottomRows(m2) = hodlr_adjoint_matvec(h.bottom_right(), Matrix<Scalar>(x2));
  const auto& tr = h.top_right();
  const auto& bl = h.bottom_left();
  // (H^*)_{12} = BL^*, (H^*)_{21} = TR^*
  if (bl.rank() > 0) y.topRows(m1).noalias() += bl.right * (bl.left.adjoint() * x2);
  if (tr.rank() > 0) y.bottomRows(m2).noalias() += tr.right * (tr.left.adjoint() * x1);
  return y;
}

/// alpha * H + beta * I, exact (no truncation).
template <typename Scalar>
HodlrMatrix<Scalar> hodlr_scale_shift(const HodlrMatrix<Scalar>& h, Scalar alpha, Scalar beta) {
  if (h.is_leaf()) {
    Matrix<Scalar> d = alpha * h.dense_block();
    d.diagonal().array() += beta;
    return HodlrMatrix<Scalar>::leaf(std::move(d));
  }
  return HodlrMatrix<Scalar>::branch(
      hodlr_scale_shift(h.top_left(), alpha, beta), hodlr_scale_shift(h.bottom_right(), alpha, beta),
      LowRankBlock<Scalar>(alpha * h.top_right().left, h.top_right().right),
      LowRankBlock<Scalar>(alpha * h.bottom_left().left, h.bottom_left().right));
}

template <typename Scalar>
HodlrMatrix<Scalar> hodlr_scale(const HodlrMatrix<Scalar>& h, Scalar alpha) {
  return hodlr_scale_shift(h, alpha, Scalar(0));
}

namespace detail {

template <typename Scalar>
HodlrMatrix<Scalar> add_rec(const HodlrMatrix<Scalar>& a, const HodlrMatrix<Scalar>& b,
                            const HodlrConfig& cfg, Index top, const std::string& path) {
  require_same_structure(a, b, "hodlr_add");
  if (a.is_leaf()) return HodlrMatrix<Scalar>::leaf(a.dense_block() + b.dense_block());
  require_same_structure(a.top_left(), b.top_left(), "hodlr_add");
  auto tl = add_rec(a.top_left(), b.top_left(), cfg, top, child_path(path, "TL"));
  auto br = add_rec(a.bottom_right(), b.bottom_right(), cfg, top, child_path(path, "BR"));
  auto tr = recompress_sum<Scalar>({&a.top_right(), &b.top_right()}, cfg, top, child_path(path, "TR"));
  auto bl = recompress_sum<Scalar>({&a.bottom_left(), &b.bottom_left()}, cfg, top,
                                   child_path(path, "BL"));
  return HodlrMatrix<Scalar>::branch(std::move(tl), std::move(br), std::move(tr), std::move(bl));
}

/// H + U V^* with the update split across the partition.
template <typename Scalar>
HodlrMatrix<Scalar> add_low_rank_rec(const HodlrMatrix<Scalar>& h, const Matrix<Scalar>& u,
                                     const Matrix<Scalar>& v, const HodlrConfig& cfg, Index top,
                                     const std::string& path) {
  if (u.cols() == 0) return h;
  if (h.is_leaf()) return HodlrMatrix<Scalar>::leaf(h.dense_block() + u * v.adjoint());
  const Index m1 = h.top_left().size(), m2 = h.bottom_right().size();
  const Matrix<Scalar> u1 = u.topRows(m1), u2 = u.bottomRows(m2);
  const Matrix<Scalar> v1 = v.topRows(m1), v2 = v.bottomRows(m2);
  auto tl = add_low_rank_rec<Scalar>(h.top_left(), u1, v1, cfg, top, child_path(path, "TL"));
  auto br = add_low_rank_rec<Scalar>(h.bottom_right(), u2, v2, cfg, top, child_path(path, "BR"));
  const LowRankBlock<Scalar> upd12(u1, v2), upd21(u2, v1);
  auto tr = recompress_sum<Scalar>({&h.top_right(), &upd12}, cfg, top, child_path(path, "TR"));
  auto bl = recompress_sum<Scalar>({&h.bottom_left(), &upd21}, cfg, top, child_path(path, "BL"));
  return HodlrMatrix<Scalar>::branch(std::move(tl), std::move(br), std::move(tr), std::move(bl));
}

template <typename Scalar>
HodlrMatrix<Scalar> mul_rec(const HodlrMatrix<Scalar>& a, const HodlrMatrix<Scalar>& b,
                            const HodlrConfig& cfg, Index top, const std::string& path) {
  require_same_structure(a, b, "hodlr_mul");
  if (a.is_leaf()) return HodlrMatrix<Scalar>::leaf(a.dense_block() * b.dense_block());
  const auto& a12 = a.top_right();
  const auto& a21 = a.bottom_left();
  const auto& b12 = b.top_right();
  const auto& b21 = b.bottom_left();

  // C11 = A11 B11 + A12 B21, C22 = A22 B22 + A21 B12
  auto c11 = mul_rec(a.top_left(), b.top_left(), cfg, top, child_path(path, "TL"));
  if (a12.rank() > 0 && b21.rank() > 0) {
    c11 = add_low_rank_rec<Scalar>(c11, a12.left * (a12.right.adjoint() * b21.left), b21.right,
                                   cfg, top, child_path(path, "TL"));
  }
  auto c22 = mul_rec(a.bottom_right(), b.bottom_right(), cfg, top, child_path(path, "BR"));
  if (a21.rank() > 0 && b12.rank() > 0) {
    c22 = add_low_rank_rec<Scalar>(c22, a21.left * (a21.right.adjoint() * b12.left), b12.right,
                                   cfg, top, child_path(path, "BR"));
  }

  // C12 = A11 B12 + A12 B22, C21 = A21 B11 + A22 B21
  const LowRankBlock<Scalar> p1(hodlr_matvec(a.top_left(), b12.left), b12.right);
  const LowRankBlock<Scalar> p2(a12.left, hodlr_adjoint_matvec(b.bottom_right(), a12.right));
  auto c12 = recompress_sum<Scalar>({&p1, &p2}, cfg, top, child_path(path, "TR"));
  const LowRankBlock<Scalar> q1(a21.left, hodlr_adjoint_matvec(b.top_left(), a21.right));
  const LowRankBlock<Scalar> q2(hodlr_matvec(a.bottom_right(), b21.left), b21.right);
  auto c21 = recompress_sum<Scalar>({&q1, &q2}, cfg, top, child_path(path, "BL"));
  return HodlrMatrix<Scalar>::branch(std::move(c11), std::move(c22), std::move(c12),
                                     std::move(c21));
}

inline constexpr double kPivotRelThreshold = 1e-14;

template <typename Scalar>
Eigen::PartialPivLU<Matrix<Scalar>> factor_leaf(const Matrix<Scalar>& d, double normRef,
                                                const std::string& path) {
  Eigen::PartialPivLU<Matrix<Scalar>> lu(d);
  const double threshold = kPivotRelThreshold * normRef;
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot > threshold)) throw SingularPivot(path, pivot, threshold);
  return lu;
}

template <typename Scalar>
HodlrMatrix<Scalar> inverse_rec(const HodlrMatrix<Scalar>& a, const HodlrConfig& cfg, Index top,
                                double normRef, const std::string& path) {
  if (a.is_leaf()) {
    return HodlrMatrix<Scalar>::leaf(factor_leaf<Scalar>(a.dense_block(), normRef, path).inverse());
  }
  const auto& a12 = a.top_right();
  const auto& a21 = a.bottom_left();
  const auto x11 = inverse_rec(a.top_left(), cfg, top, normRef, child_path(path, "TL"));
  // X11 A12 = Y V12^*, A21 X11 = U21 Z^*
  const Matrix<Scalar> y = hodlr_matvec(x11, a12.left);
  const Matrix<Scalar> z = hodlr_adjoint_matvec(x11, a21.right);
  // S = A22 - A21 X11 A12
  Matrix<Scalar> su = a21.left * (a21.right.adjoint() * y);
  su = -su;
  const auto s = add_low_rank_rec<Scalar>(a.bottom_right(), su, a12.right, cfg, top,
                                          child_path(path, "BR"));
  const auto x22 = inverse_rec(s, cfg, top, normRef, child_path(path, "BR"));
  const Matrix<Scalar> x22u21 = hodlr_matvec(x22, a21.left);
  const Matrix<Scalar> vx22 = hodlr_adjoint_matvec(x22, a12.right);  // (V12^* X22)^*

  // TL = X11 + Y (V12^* X22 U21) Z^*
  auto tl = add_low_rank_rec<Scalar>(x11, y * (a12.right.adjoint() * x22u21), z, cfg, top,
                                     child_path(path, "TL"));
  const LowRankBlock<Scalar> tr_raw(-y, vx22);
  const LowRankBlock<Scalar> bl_raw(-x22u21, z);
  auto tr = recompress_sum<Scalar>({&tr_raw}, cfg, top, child_path(path, "TR"));
  auto bl = recompress_sum<Scalar>({&bl_raw}, cfg, top, child_path(path, "BL"));
  return HodlrMatrix<Scalar>::branch(std::move(tl), x22, std::move(tr), std::move(bl));
}

}  // namespace detail

/// Sum with off-diagonal blocks re-truncated at cfg.epsilon.
template <typename Scalar>
HodlrMatrix<Scalar> hodlr_add(const HodlrMatrix<Scalar>& a, const HodlrMatrix<Scalar>& b,
                              const HodlrConfig& cfg = {}) {
  cfg.validate();
  return detail::add_rec(a, b, cfg, a.size(), "root");
}

template <typename Scalar>
HodlrMatrix<Scalar> hodlr_add_low_rank(const HodlrMatrix<Scalar>& h, const Matrix<Scalar>& u,
                                       const Matrix<Scalar>& v, const HodlrConfig& cfg = {}) {
  if (u.rows() != h.size() || v.rows() != h.size() || u.cols() != v.cols()) {
    throw DimensionMismatch("hodlr_add_low_rank: factor sizes do not match");
  }
  return detail::add_low_rank_rec<Scalar>(h, u, v, cfg, h.size(), "root");
}

template <typename Scalar>
HodlrMatrix<Scalar> hodlr_mul(const HodlrMatrix<Scalar>& a, const HodlrMatrix<Scalar>& b,
                              const HodlrConfig& cfg = {}) {
  cfg.validate();
  return detail::mul_rec(a, b, cfg, a.size(), "root");
}

/// Power iteration on A^* A from a fixed-seed start. The returned value
/// never exceeds sigma_1 (it is a Rayleigh-quotient estimate).
template <typename Scalar>
double hodlr_norm2_estimate(const HodlrMatrix<Scalar>& a, int iters = 20) {
  if (iters < 1) throw InvalidArgument("hodlr_norm2_estimate: iters must be >= 1");
  if (a.size() == 0) return 0.0;
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  Matrix<Scalar> x(a.size(), 1);
  for (Index i = 0; i < x.rows(); ++i) {
    if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      x(i, 0) = Scalar(re, im);
    } else {
      x(i, 0) = gauss(rng);
    }
  }
  x /= x.norm();
  double best = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Matrix<Scalar> y = hodlr_matvec(a, x);
    const double ny = y.norm();
    best = std::max(best, ny);
    if (ny == 0.0) break;
    Matrix<Scalar> z = hodlr_adjoint_matvec(a, y);
    const double nz = z.norm();
    if (nz == 0.0) break;
    x = z / nz;
  }
  return best;
}

/// Recursive 2x2 block inversion through the Schur complement of the
/// leading block; fails with SingularPivot when a leaf pivot drops below
/// 1e-14 * ||A||_2 (estimated).
template <typename Scalar>
HodlrMatrix<Scalar> hodlr_inverse(const HodlrMatrix<Scalar>& a, const HodlrConfig& cfg = {}) {
  cfg.validate();
  const double normRef = hodlr_norm2_estimate(a);
  return detail::inverse_rec(a, cfg, a.size(), normRef, "root");
}

/// Block LU factorization A = [I 0; A21 A11^{-1} I] [A11 A12; 0 S] applied
/// recursively, with dense partial-pivot LU at the leaves.
template <typename Scalar>
class HodlrLu {
 public:
  HodlrLu(const HodlrMatrix<Scalar>& a, const HodlrConfig& cfg = {}) : size_(a.size()) {
    cfg.validate();
    build(a, cfg, a.size(), hodlr_norm2_estimate(a), "root");
  }

  Index size() const { return size_; }

  Matrix<Scalar> solve(const Matrix<Scalar>& b) const {
    if (b.rows() != size_) {
      throw DimensionMismatch("hodlr_solve: right-hand side has " + std::to_string(b.rows()) +
                              " rows, matrix has size " + std::to_string(size_));
    }
    if (leaf_) return leaf_->solve(b);
    const Index m1 = first_->size(), m2 = second_->size();
    const Matrix<Scalar> y1 = first_->solve(b.topRows(m1));
    Matrix<Scalar> rhs2 = b.bottomRows(m2);
    if (lowerLeft_.cols() > 0) rhs2.noalias() -= lowerLeft_ * (lowerRight_.adjoint() * y1);
    const Matrix<Scalar> x2 = second_->solve(rhs2);
    Matrix<Scalar> x(size_, b.cols());
    x.topRows(m1) = y1;
    if (upperSolved_.cols() > 0) x.topRows(m1).noalias() -= upperSolved_ * (upperRight_.adjoint() * x2);
    x.bottomRows(m2) = x2;
    return x;
  }

 private:
  HodlrLu() = default;

  void build(const HodlrMatrix<Scalar>& a, const HodlrConfig& cfg, Index top, double normRef,
             const std::string& path) {
    size_ = a.size();
    if (a.is_leaf()) {
      leaf_ = std::make_shared<Eigen::PartialPivLU<Matrix<Scalar>>>(
          detail::factor_leaf<Scalar>(a.dense_block(), normRef, path));
      return;
    }
    first_ = std::shared_ptr<HodlrLu>(new HodlrLu());
    first_->build(a.top_left(), cfg, top, normRef, detail::child_path(path, "TL"));
    upperSolved_ = first_->solve(a.top_right().left);  // A11^{-1} U12
    upperRight_ = a.top_right().right;
    lowerLeft_ = a.bottom_left().left;
    lowerRight_ = a.bottom_left().right;
    Matrix<Scalar> su = -(lowerLeft_ * (lowerRight_.adjoint() * upperSolved_));
    const auto s = detail::add_low_rank_rec<Scalar>(a.bottom_right(), su, upperRight_, cfg, top,
                                                    detail::child_path(path, "BR"));
    second_ = std::shared_ptr<HodlrLu>(new HodlrLu());
    second_->build(s, cfg, top, normRef, detail::child_path(path, "BR"));
  }

  Index size_ = 0;
  std::shared_ptr<const Eigen::PartialPivLU<Matrix<Scalar>>> leaf_;
  std::shared_ptr<HodlrLu> first_, second_;
  Matrix<Scalar> upperSolved_, upperRight_, lowerLeft_, lowerRight_;
};

template <typename Scalar>
Matrix<Scalar> hodlr_solve(const HodlrMatrix<Scalar>& a, const Matrix<Scalar>& rhs,
                           const HodlrConfig& cfg = {}) {
  return HodlrLu<Scalar>(a, cfg).solve(rhs);
}

template <typename Scalar>
Vector<Scalar> hodlr_solve(const HodlrMatrix<Scalar>& a, const Vector<Scalar>& rhs,
                           const HodlrConfig& cfg = {}) {
  return HodlrLu<Scalar>(a, cfg).solve(Matrix<Scalar>(rhs)).col(0);
}

/// Gershgorin-style bound: every eigenvalue lies within
/// max_i (|a_ii - center| + sum_{j != i} |a_ij|) of center. The low-rank
/// contribution to the row sums is bounded through |U| |V|^T.
template <typename Scalar>
double hodlr_gershgorin_radius(const HodlrMatrix<Scalar>& h, Scalar center) {
  RealVector rowAbs = RealVector::Zero(h.size());
  RealVector diagDist = RealVector::Zero(h.size());
  struct Walker {
    static void run(const HodlrMatrix<Scalar>& n, Index offset, Scalar c, RealVector& rows,
                    RealVector& diag) {
      if (n.is_leaf()) {
        const auto& d = n.dense_block();
        for (Index i = 0; i < d.rows(); ++i) {
          double s = 0.0;
          for (Index j = 0; j < d.cols(); ++j) {
            if (i != j) s += std::abs(d(i, j));
          }
          rows(offset + i) += s;
          diag(offset + i) = std::abs(d(i, i) - c);
        }
        return;
      }
      const Index m1 = n.top_left().size();
      run(n.top_left(), offset, c, rows, diag);
      run(n.bottom_right(), offset + m1, c, rows, diag);
      const auto add_block = [&](const LowRankBlock<Scalar>& b, Index rowOffset) {
        if (b.rank() == 0) return;
        const RealVector colSums = b.right.cwiseAbs().colwise().sum().transpose();
        rows.segment(rowOffset, b.rows()) += b.left.cwiseAbs() * colSums;
      };
      add_block(n.top_right(), offset);
      add_block(n.bottom_left(), offset + m1);
    }
  };
  Walker::run(h, 0, center, rowAbs, diagDist);
  return (rowAbs + diagDist).maxCoeff();
}

}  // namespace qsfunm
