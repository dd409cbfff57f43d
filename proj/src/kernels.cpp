#include "kirchhoff/kernels.hpp"

namespace kirchhoff::kernels {

namespace detail {

double element_power(const DiscreteOperators& ops, const Vector& u, int e, int p) {
  const ElementTables& t = ops.tables();
  std::array<double, 4> local{};
  gather_element(t, u, e, local);
  const double measure = ops.mesh().element_measure(e);
  if (t.nodes_per_element == 2) return segment_power(local[0], local[1], p, measure);
  // Bilinear u on a cell: u^p has degree p <= 4 per axis, so the 3x3 Gauss rule is exact.
  double sum = 0.0;
  for (int q = 0; q < t.quadrature_points; ++q) {
    const double v = at_point(t, local, q);
    double vp = v;
    for (int k = 1; k < p; ++k) vp *= v;
    sum += t.weight[q] * vp;
  }
  return sum * measure;
}

}  // namespace detail

namespace serial {

void symmetric_spmv(const SparseMatrix& a, const Vector& x, Vector& y) {
  const auto n = a.outerSize();
  y.resize(n);
  for (Eigen::Index col = 0; col < n; ++col) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) sum += it.value() * x[it.row()];
    y[col] = sum;
  }
}

double integrate_power(const DiscreteOperators& ops, const Vector& u, int p) {
  double sum = 0.0;
  for (int e = 0; e < ops.mesh().element_count(); ++e) sum += detail::element_power(ops, u, e, p);
  return sum;
}

}  // namespace serial

namespace parallel {

void symmetric_spmv(const SparseMatrix& a, const Vector& x, Vector& y) {
  const auto n = static_cast<int>(a.outerSize());
  y.resize(n);
#pragma omp parallel for schedule(static)
  for (int col = 0; col < n; ++col) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) sum += it.value() * x[it.row()];
    y[col] = sum;
  }
}

double integrate_power(const DiscreteOperators& ops, const Vector& u, int p) {
  const int ne = ops.mesh().element_count();
  std::vector<double> parts(static_cast<std::size_t>(ne));
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) parts[e] = detail::element_power(ops, u, e, p);
  // Serial accumulation in element order keeps the result thread-count independent.
  double sum = 0.0;
  for (double v : parts) sum += v;
  return sum;
}

}  // namespace parallel

}  // namespace kirchhoff::kernels
