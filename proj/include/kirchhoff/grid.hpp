#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace kirchhoff {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using MeshId = std::uint64_t;

enum class DomainKind { interval, rectangle };

std::string_view to_string(DomainKind kind);
DomainKind domain_kind_from_string(std::string_view name);

struct AxisBounds {
  double lower = 0.0;
  double upper = 1.0;
  double length() const { return upper - lower; }
};

/// Uniform mesh of an interval (P1 segments) or a tensor rectangle (Q1 cells).
/// Nodes are numbered lexicographically with x fastest; interior nodes carry
/// the degrees of freedom, boundary nodes are Dirichlet.
class Mesh {
 public:
  DomainKind kind() const { return kind_; }
  int dimension() const { return kind_ == DomainKind::interval ? 1 : 2; }
  const std::vector<AxisBounds>& bounds() const { return bounds_; }
  /// Elements per axis.
  const std::vector<int>& resolution() const { return resolution_; }
  double spacing(int axis) const;

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int interior_count() const { return static_cast<int>(node_of_dof_.size()); }
  int element_count() const { return static_cast<int>(element_measure_.size()); }
  int nodes_per_element() const { return dimension() == 1 ? 2 : 4; }

  /// (x, y); y is 0 on intervals.
  const std::array<double, 2>& node(int index) const { return nodes_[index]; }
  bool is_boundary(int node) const { return dof_of_node_[node] < 0; }
  /// Degree-of-freedom index of a node, -1 for boundary nodes.
  int dof(int node) const { return dof_of_node_[node]; }
  int node_of_dof(int dof) const { return node_of_dof_[dof]; }

  /// Vertex indices of element e. Q1 cells list (x0,y0),(x1,y0),(x0,y1),(x1,y1).
  std::span<const int> element(int e) const {
    const auto npe = static_cast<std::size_t>(nodes_per_element());
    return {element_nodes_.data() + static_cast<std::size_t>(e) * npe, npe};
  }
  double element_measure(int e) const { return element_measure_[e]; }
  std::span<const double> element_measures() const { return element_measure_; }

  /// |Omega|.
  double measure() const;
  MeshId id() const { return id_; }

 private:
  friend Mesh build_mesh(DomainKind, std::vector<AxisBounds>, std::vector<int>);

  DomainKind kind_ = DomainKind::interval;
  std::vector<AxisBounds> bounds_;
  std::vector<int> resolution_;
  std::vector<std::array<double, 2>> nodes_;
  std::vector<int> dof_of_node_;
  std::vector<int> node_of_dof_;
  std::vector<int> element_nodes_;
  std::vector<double> element_measure_;
  MeshId id_ = 0;
};

/// Throws InvalidDomainError for degenerate or unordered bounds and
/// ResolutionError when any axis has fewer than 2 elements.
Mesh build_mesh(DomainKind kind, std::vector<AxisBounds> bounds, std::vector<int> resolution);
Mesh build_mesh(DomainKind kind, std::vector<AxisBounds> bounds, int resolution);

/// Interior-node values of a piecewise-linear (bilinear in 2D) function.
struct FieldVector {
  Vector values;
  MeshId mesh_id = 0;

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
};

void require_same_mesh(MeshId expected, MeshId actual, const char* context);

/// Largest absolute row sum.
double infinity_norm(const SparseMatrix& a);

FieldVector operator+(const FieldVector& lhs, const FieldVector& rhs);
FieldVector operator-(const FieldVector& lhs, const FieldVector& rhs);
FieldVector operator-(const FieldVector& v);
FieldVector operator*(double scale, const FieldVector& v);

/// Reference data shared by every (congruent) element of a uniform mesh.
struct ElementTables {
  int nodes_per_element = 0;
  int quadrature_points = 0;
  /// shape[q * npe + a]: value of local basis a at quadrature point q.
  std::vector<double> shape;
  /// Quadrature weights on the reference cell, summing to 1.
  std::vector<double> weight;
  /// Physical gradient of local basis a at the element centre: grad[a] = (dx, dy).
  std::vector<std::array<double, 2>> centre_gradient;
  /// local_dof[e * npe + a]: dof index of local node a of element e, or -1.
  std::vector<int> local_dof;
  /// CSR incidence dof -> (element, local node), elements ascending.
  std::vector<int> incidence_offset;
  std::vector<int> incidence_element;
  std::vector<int> incidence_local;
};

/// P1/Q1 stiffness and consistent mass over the interior nodes, with a cached
/// Cholesky factor of the stiffness. Immutable after assembly.
class DiscreteOperators {
 public:
  const Mesh& mesh() const { return *mesh_; }
  MeshId mesh_id() const { return mesh_->id(); }
  Eigen::Index size() const { return stiffness_.rows(); }

  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& mass() const { return mass_; }
  const ElementTables& tables() const { return tables_; }

  FieldVector field(Vector values) const;
  FieldVector zeros() const;
  FieldVector interpolate(const std::function<double(double, double)>& fn) const;

  Vector apply_stiffness(const Vector& u) const;
  Vector apply_mass(const Vector& u) const;
  /// ||u||^2 = u^T K u = integral of |grad u_h|^2.
  double energy(const FieldVector& u) const;
  double energy(const Vector& u) const;
  /// u^T M v.
  double mass_inner(const Vector& u, const Vector& v) const;
  /// K^{-1} rhs.
  Vector solve_stiffness(const Vector& rhs) const;

  /// Values on all mesh nodes (zero on the boundary).
  std::vector<double> nodal_values(const FieldVector& u) const;

 private:
  friend DiscreteOperators assemble_operators(const Mesh& mesh);

  std::shared_ptr<const Mesh> mesh_;
  SparseMatrix stiffness_;
  SparseMatrix mass_;
  ElementTables tables_;
  std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> stiffness_factor_;
};

DiscreteOperators assemble_operators(const Mesh& mesh);

/// Exact integral of u_h^p over the domain, p in {1,2,3,4}.
double integrate_power(const FieldVector& u, int p, const DiscreteOperators& ops);

}  // namespace kirchhoff
