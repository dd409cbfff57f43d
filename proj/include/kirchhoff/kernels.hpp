#pragma once

// Element-loop kernels in two flavours: `serial` is the reference
// implementation, `parallel` splits the same work across OpenMP threads.
// The parallel versions evaluate per-element contributions independently and
// then gather them per degree of freedom in ascending element order, so their
// results are bitwise identical to the serial scatter loops.

#include <array>
#include <cmath>
#include <vector>

#include "kirchhoff/grid.hpp"

namespace kirchhoff::kernels {

namespace detail {

/// Values of u at the local nodes of element e (zero at boundary nodes).
inline void gather_element(const ElementTables& t, const Vector& u, int e,
                           std::array<double, 4>& local) {
  const int npe = t.nodes_per_element;
  for (int a = 0; a < npe; ++a) {
    const int d = t.local_dof[static_cast<std::size_t>(e) * npe + a];
    local[a] = d >= 0 ? u[d] : 0.0;
  }
}

inline double at_point(const ElementTables& t, const std::array<double, 4>& local, int q) {
  const int npe = t.nodes_per_element;
  double v = 0.0;
  for (int a = 0; a < npe; ++a) v += t.shape[static_cast<std::size_t>(q) * npe + a] * local[a];
  return v;
}

/// Closed-form integral of a linear function with end values (ua, ub) raised to p,
/// over a segment of length h.
inline double segment_power(double ua, double ub, int p, double h) {
  double sum = 0.0;
  double pa = 1.0;
  for (int k = 0; k <= p; ++k) {
    sum += pa * std::pow(ub, p - k);
    pa *= ua;
  }
  return h * sum / (p + 1);
}

template <class F>
void element_load(const DiscreteOperators& ops, const Vector& u, int e, F& g,
                  std::array<double, 4>& out) {
  const ElementTables& t = ops.tables();
  const int npe = t.nodes_per_element;
  std::array<double, 4> local{};
  gather_element(t, u, e, local);
  out.fill(0.0);
  const double measure = ops.mesh().element_measure(e);
  for (int q = 0; q < t.quadrature_points; ++q) {
    const double gq = g(at_point(t, local, q)) * t.weight[q] * measure;
    for (int a = 0; a < npe; ++a) out[a] += gq * t.shape[static_cast<std::size_t>(q) * npe + a];
  }
}

template <class F>
void element_matrix(const DiscreteOperators& ops, const Vector& u, int e, F& w, double* out) {
  const ElementTables& t = ops.tables();
  const int npe = t.nodes_per_element;
  std::array<double, 4> local{};
  gather_element(t, u, e, local);
  for (int k = 0; k < npe * npe; ++k) out[k] = 0.0;
  const double measure = ops.mesh().element_measure(e);
  for (int q = 0; q < t.quadrature_points; ++q) {
    const double wq = w(at_point(t, local, q)) * t.weight[q] * measure;
    const double* phi = &t.shape[static_cast<std::size_t>(q) * npe];
    for (int a = 0; a < npe; ++a)
      for (int b = 0; b < npe; ++b) out[a * npe + b] += wq * phi[a] * phi[b];
  }
}

double element_power(const DiscreteOperators& ops, const Vector& u, int e, int p);

}  // namespace detail

namespace serial {

/// y = A x for a symmetric sparse matrix (columns read as rows).
void symmetric_spmv(const SparseMatrix& a, const Vector& x, Vector& y);

/// out_i = integral of g(u_h) phi_i, by the element quadrature rule.
template <class F>
void galerkin_load(const DiscreteOperators& ops, const Vector& u, F&& g, Vector& out) {
  const ElementTables& t = ops.tables();
  const int npe = t.nodes_per_element;
  out.setZero(ops.size());
  std::array<double, 4> local{};
  for (int e = 0; e < ops.mesh().element_count(); ++e) {
    detail::element_load(ops, u, e, g, local);
    for (int a = 0; a < npe; ++a) {
      const int d = t.local_dof[static_cast<std::size_t>(e) * npe + a];
      if (d >= 0) out[d] += local[a];
    }
  }
}

/// local[e*npe*npe + a*npe + b] = integral over e of w(u_h) phi_a phi_b.
template <class F>
void element_weighted_mass(const DiscreteOperators& ops, const Vector& u, F&& w,
                           std::vector<double>& local) {
  const int npe = ops.tables().nodes_per_element;
  const int ne = ops.mesh().element_count();
  local.assign(static_cast<std::size_t>(ne) * npe * npe, 0.0);
  for (int e = 0; e < ne; ++e)
    detail::element_matrix(ops, u, e, w, &local[static_cast<std::size_t>(e) * npe * npe]);
}

double integrate_power(const DiscreteOperators& ops, const Vector& u, int p);

}  // namespace serial

namespace parallel {

void symmetric_spmv(const SparseMatrix& a, const Vector& x, Vector& y);

template <class F>
void galerkin_load(const DiscreteOperators& ops, const Vector& u, F&& g, Vector& out) {
  const ElementTables& t = ops.tables();
  const int npe = t.nodes_per_element;
  const int ne = ops.mesh().element_count();
  std::vector<double> contrib(static_cast<std::size_t>(ne) * npe);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    std::array<double, 4> local{};
    detail::element_load(ops, u, e, g, local);
    for (int a = 0; a < npe; ++a) contrib[static_cast<std::size_t>(e) * npe + a] = local[a];
  }
  const auto n = static_cast<int>(ops.size());
  out.resize(n);
#pragma omp parallel for schedule(static)
  for (int d = 0; d < n; ++d) {
    double sum = 0.0;
    for (int k = t.incidence_offset[d]; k < t.incidence_offset[d + 1]; ++k)
      sum += contrib[static_cast<std::size_t>(t.incidence_element[k]) * npe + t.incidence_local[k]];
    out[d] = sum;
  }
}

template <class F>
void element_weighted_mass(const DiscreteOperators& ops, const Vector& u, F&& w,
                           std::vector<double>& local) {
  const int npe = ops.tables().nodes_per_element;
  const int ne = ops.mesh().element_count();
  local.assign(static_cast<std::size_t>(ne) * npe * npe, 0.0);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e)
    detail::element_matrix(ops, u, e, w, &local[static_cast<std::size_t>(e) * npe * npe]);
}

double integrate_power(const DiscreteOperators& ops, const Vector& u, int p);

}  // namespace parallel

}  // namespace kirchhoff::kernels
