#pragma once

#include <stdexcept>
#include <string>

namespace qsfunm {

/// Base class of every error raised by the library. The CLI maps these to
/// exit status 1; anything else is a usage error or a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Eigenvector matrix too ill-conditioned to diagonalize reliably.
class NearDefective : public Error {
 public:
  using Error::Error;
};

/// A truncated low-rank block still exceeds HodlrConfig::maxRank.
class RankOverflow : public Error {
 public:
  RankOverflow(std::string block, long rank, long cap)
      : Error("rank overflow in block " + block + ": rank " + std::to_string(rank) +
              " exceeds cap " + std::to_string(cap)),
        block_(std::move(block)) {}
  const std::string& block() const noexcept { return block_; }

 private:
  std::string block_;
};

/// A leaf pivot fell below the singularity threshold during HODLR
/// inversion or factorization.
class SingularPivot : public Error {
 public:
  SingularPivot(std::string path, double pivot, double threshold)
      : Error("singular pivot at " + path + ": |pivot| = " + std::to_string(pivot) +
              " <= " + std::to_string(threshold)),
        path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class NodeSingularity : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class DegenerateContour : public Error {
 public:
  using Error::Error;
};

class SingularArgument : public Error {
 public:
  using Error::Error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class ExperimentIntegrity : public Error {
 public:
  using Error::Error;
};

}  // namespace qsfunm
