#include "kirchhoff/spectra_linear.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "kirchhoff/errors.hpp"

namespace kirchhoff {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

void deflate(const DiscreteOperators& ops, const std::vector<EigenPair>& found, Vector& x) {
  // Two passes of modified Gram-Schmidt in the M inner product.
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& pair : found) x -= ops.mass_inner(pair.phi.values, x) * pair.phi.values;
}

void fix_sign(Vector& x, bool principal) {
  if (principal) {
    if (x.sum() < 0) x = -x;
    return;
  }
  const double cutoff = 1e-8 * x.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > cutoff) {
      if (x[i] < 0) x = -x;
      return;
    }
  }
}

}  // namespace

std::vector<EigenPair> dirichlet_eigs(const DiscreteOperators& ops, int count,
                                      const LinearEigenOptions& options) {
  const auto n = ops.size();
  if (count < 1 || count > n)
    throw InvalidArgumentError("eigenpair count must lie in [1, " + std::to_string(n) + "]");
  if (!(options.tol > 0)) throw InvalidArgumentError("eigen tolerance must be positive");

  // Evaluating K x - lambda M x loses about eps ||K|| ||x|| to cancellation;
  // tolerances below that floor are clamped to it.
  const double knorm = infinity_norm(ops.stiffness());

  std::vector<EigenPair> found;
  found.reserve(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) {
    std::mt19937_64 rng(0x5eedull + static_cast<unsigned>(k));
    std::uniform_real_distribution<double> dist(k == 1 ? 0.5 : -1.0, 1.5);
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = dist(rng);
    deflate(ops, found, x);
    x /= std::sqrt(ops.mass_inner(x, x));

    double lambda = 0.0;
    double tol = options.tol;
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < options.max_iterations) {
      ++it;
      Vector y = ops.solve_stiffness(ops.apply_mass(x));
      deflate(ops, found, y);
      x = y / std::sqrt(ops.mass_inner(y, y));
      const Vector kx = ops.apply_stiffness(x);
      lambda = x.dot(kx);
      residual = (kx - lambda * ops.apply_mass(x)).norm() / kx.norm();
      tol = std::max(options.tol, 4 * eps * knorm * x.norm() / kx.norm());
      if (residual <= tol) break;
    }
    if (residual > tol)
      throw ConvergenceError("inverse iteration for eigenpair " + std::to_string(k) +
                                 " did not converge",
                             residual, x);
    fix_sign(x, k == 1);
    found.push_back({lambda, ops.field(x), k, residual, it});
  }
  return found;
}

EigenPair principal_eigenpair(const DiscreteOperators& ops, double tol) {
  LinearEigenOptions options;
  options.tol = tol;
  return dirichlet_eigs(ops, 1, options).front();
}

}  // namespace kirchhoff
