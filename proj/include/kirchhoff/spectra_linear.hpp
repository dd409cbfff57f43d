#pragma once

#include <vector>

#include "kirchhoff/grid.hpp"

namespace kirchhoff {

/// Generalized eigenpair K phi = lambda M phi of the discrete Dirichlet Laplacian.
struct EigenPair {
  double lambda = 0.0;
  /// M-normalized; the first eigenfunction is positive, later ones have a
  /// positive leading component.
  FieldVector phi;
  int index = 0;
  /// ||K phi - lambda M phi|| / ||K phi||
  double residual = 0.0;
  int iterations = 0;
};

struct LinearEigenOptions {
  double tol = 1e-10;
  int max_iterations = 10000;
};

/// The `count` smallest eigenpairs, ascending, by inverse power iteration
/// with M-orthogonal deflation against the pairs already found. A tolerance
/// below the round-off floor 4 eps ||K|| ||phi|| / ||K phi|| is clamped to it.
std::vector<EigenPair> dirichlet_eigs(const DiscreteOperators& ops, int count,
                                      const LinearEigenOptions& options = {});

/// Convenience: the principal pair only.
EigenPair principal_eigenpair(const DiscreteOperators& ops, double tol = 1e-10);

}  // namespace kirchhoff
