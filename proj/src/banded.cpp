#include "kirchhoff/banded.hpp"

#include <cmath>

#include <lapacke.h>

#include "kirchhoff/errors.hpp"

namespace kirchhoff {

BandMatrix::BandMatrix(int n, int lower, int upper)
    : n_(n),
      kl_(lower),
      ku_(upper),
      ldab_(2 * lower + upper + 1),
      storage_(static_cast<std::size_t>(n) * (2 * lower + upper + 1), 0.0) {}

double BandMatrix::operator()(int row, int col) const {
  if (row - col > kl_ || col - row > ku_) return 0.0;
  return storage_[index(row, col)];
}

void BandMatrix::add_sparse(const SparseMatrix& a, double scale) {
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const auto row = static_cast<int>(it.row());
      if (row - col > kl_ || col - row > ku_)
        throw InvalidArgumentError("sparse entry outside the band");
      add(row, static_cast<int>(col), scale * it.value());
    }
  }
}

double BandMatrix::norm1() const {
  double best = 0.0;
  for (int col = 0; col < n_; ++col) {
    double sum = 0.0;
    for (int row = std::max(0, col - ku_); row <= std::min(n_ - 1, col + kl_); ++row)
      sum += std::abs(storage_[index(row, col)]);
    best = std::max(best, sum);
  }
  return best;
}

Vector BandMatrix::multiply(const Vector& x) const {
  Vector y = Vector::Zero(n_);
  for (int col = 0; col < n_; ++col)
    for (int row = std::max(0, col - ku_); row <= std::min(n_ - 1, col + kl_); ++row)
      y[row] += storage_[index(row, col)] * x[col];
  return y;
}

BandedLU::BandedLU(BandMatrix a) : lu_(std::move(a)), pivots_(static_cast<std::size_t>(lu_.n_)) {
  const double anorm = lu_.norm1();
  info_ = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, lu_.n_, lu_.n_, lu_.kl_, lu_.ku_, lu_.storage_.data(),
                         lu_.ldab_, pivots_.data());
  if (info_ != 0) return;
  double rcond = 0.0;
  const int status = LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', lu_.n_, lu_.kl_, lu_.ku_,
                                    lu_.storage_.data(), lu_.ldab_, pivots_.data(), anorm, &rcond);
  rcond_ = status == 0 ? rcond : 0.0;
  sign_det_ = 1;
  for (int i = 0; i < lu_.n_; ++i) {
    // U sits in rows 0..kl+ku of the factored storage; its diagonal in row kl+ku.
    const double pivot = lu_.storage_[static_cast<std::size_t>(i) * lu_.ldab_ + lu_.kl_ + lu_.ku_];
    if (pivot < 0) sign_det_ = -sign_det_;
    if (pivots_[i] != i + 1) sign_det_ = -sign_det_;
  }
}

Vector BandedLU::solve(const Vector& rhs) const {
  if (!ok()) throw SingularJacobianError("band factorization is singular",
                                         SingularJacobianError::Source::base, 0.0);
  Vector x = rhs;
  LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', lu_.n_, lu_.kl_, lu_.ku_, 1, lu_.storage_.data(),
                 lu_.ldab_, pivots_.data(), x.data(), lu_.n_);
  return x;
}

int stiffness_bandwidth(const Mesh& mesh) {
  // Natural ordering: 1D tridiagonal; Q1 couples dof (i,j) with (i+-1, j+-1).
  if (mesh.dimension() == 1) return 1;
  return mesh.resolution()[0];
}

}  // namespace kirchhoff
