#pragma once

#include <vector>

#include "kirchhoff/grid.hpp"

namespace kirchhoff {

/// General band matrix in LAPACK band-LU layout (room reserved for fill-in).
class BandMatrix {
 public:
  BandMatrix(int n, int lower, int upper);

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  void add(int row, int col, double value) { storage_[index(row, col)] += value; }
  double operator()(int row, int col) const;
  /// Adds scale * a for a sparse matrix whose pattern fits in the band.
  void add_sparse(const SparseMatrix& a, double scale);
  /// Maximum absolute column sum.
  double norm1() const;
  Vector multiply(const Vector& x) const;

 private:
  friend class BandedLU;
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(col) * ldab_ + (kl_ + ku_ + row - col);
  }

  int n_;
  int kl_;
  int ku_;
  int ldab_;
  std::vector<double> storage_;
};

/// Partial-pivoting band LU (LAPACK dgbtrf) with a reciprocal condition estimate.
class BandedLU {
 public:
  explicit BandedLU(BandMatrix a);

  /// False when dgbtrf met an exactly zero pivot.
  bool ok() const { return info_ == 0; }
  /// Reciprocal 1-norm condition estimate; 0 when the factorization failed.
  double rcond() const { return rcond_; }
  int sign_determinant() const { return sign_det_; }
  Vector solve(const Vector& rhs) const;

 private:
  BandMatrix lu_;
  std::vector<int> pivots_;
  int info_ = 0;
  double rcond_ = 0.0;
  int sign_det_ = 0;
};

/// Half bandwidth of the stiffness pattern on a mesh.
int stiffness_bandwidth(const Mesh& mesh);

}  // namespace kirchhoff
