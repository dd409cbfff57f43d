#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kirchhoff/kirchhoff_core.hpp"

namespace kirchhoff {

struct PropertyResult {
  std::string name;
  bool pass = false;
  int samples = 0;
  /// Worst observed value of the checked quantity, compared against `limit`.
  double worst = 0.0;
  double limit = 0.0;
  std::string detail;
};

/// picone_defect(u, v) >= -picone_slack on random u and positive v.
PropertyResult picone_suite(const DiscreteOperators& ops, int pairs, std::uint64_t seed);

/// <L(u) - L(v), u - v> >= b (|u|^2 - |v|^2)^2 on iid random pairs, with a
/// round-off allowance of 1e-12 times b (|u|^4 + |v|^4).
PropertyResult monotonicity_suite(const ProblemParams& params, int pairs, std::uint64_t seed);

/// Residual of b E K u = M g and S(8 g) = 2 S(g), both relative, <= 1e-10.
PropertyResult solve_s_suite(const ProblemParams& params, int loads, std::uint64_t seed);

/// J v against a central difference of the residual, relative <= 1e-6.
PropertyResult jacobian_fd_suite(const ProblemParams& params, int samples, std::uint64_t seed);

/// Sherman-Morrison solve against a dense LU, relative <= 1e-10. Needs a mesh
/// of at most 64 nodes.
PropertyResult sherman_morrison_suite(const ProblemParams& params, int samples,
                                      std::uint64_t seed);

/// Sign changes of det(a K - lambda f'(0) M) on (0, 3 lambda*] sit only at
/// a lambda_k / f'(0) for discrete Dirichlet eigenvalues lambda_k.
PropertyResult trivial_line_suite(const ProblemParams& params);

/// Max over rows of |lambda - lambda1 (a + b h1^2)| / lambda for a branch CSV.
PropertyResult branch_law_column_check(const std::string& csv, double lambda1, double a, double b,
                                       double tol = 1e-6);

}  // namespace kirchhoff
