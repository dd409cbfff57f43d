#include "kirchhoff/grid.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "kirchhoff/errors.hpp"
#include "kirchhoff/kernels.hpp"

namespace kirchhoff {

namespace {

// FNV-1a over the defining parameters; identical meshes share an id.
class Fnv1a {
 public:
  void add(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ull;
    }
  }
  template <class T>
  void add(const T& value) {
    add(&value, sizeof(T));
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ull;
};

// Three-point Gauss-Legendre on [0, 1]: exact through degree 5 per axis.
constexpr double kGaussOffset = 0.38729833462074168852;  // sqrt(3/5) / 2
constexpr std::array<double, 3> kGaussPoint = {0.5 - kGaussOffset, 0.5, 0.5 + kGaussOffset};
constexpr std::array<double, 3> kGaussWeight = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double hat(int a, double xi) { return a == 0 ? 1.0 - xi : xi; }

ElementTables build_tables(const Mesh& mesh) {
  ElementTables t;
  const int dim = mesh.dimension();
  t.nodes_per_element = mesh.nodes_per_element();
  const int npe = t.nodes_per_element;
  if (dim == 1) {
    t.quadrature_points = 3;
    for (int q = 0; q < 3; ++q) {
      t.weight.push_back(kGaussWeight[q]);
      for (int a = 0; a < 2; ++a) t.shape.push_back(hat(a, kGaussPoint[q]));
    }
    const double h = mesh.spacing(0);
    t.centre_gradient = {{{-1.0 / h, 0.0}}, {{1.0 / h, 0.0}}};
  } else {
    t.quadrature_points = 9;
    for (int qy = 0; qy < 3; ++qy) {
      for (int qx = 0; qx < 3; ++qx) {
        t.weight.push_back(kGaussWeight[qx] * kGaussWeight[qy]);
        for (int a = 0; a < 4; ++a)
          t.shape.push_back(hat(a & 1, kGaussPoint[qx]) * hat(a >> 1, kGaussPoint[qy]));
      }
    }
    const double hx = mesh.spacing(0);
    const double hy = mesh.spacing(1);
    for (int a = 0; a < 4; ++a) {
      const double sx = (a & 1) ? 1.0 : -1.0;
      const double sy = (a >> 1) ? 1.0 : -1.0;
      t.centre_gradient.push_back({0.5 * sx / hx, 0.5 * sy / hy});
    }
  }

  const int ne = mesh.element_count();
  t.local_dof.resize(static_cast<std::size_t>(ne) * npe);
  std::vector<int> counts(static_cast<std::size_t>(mesh.interior_count()) + 1, 0);
  for (int e = 0; e < ne; ++e) {
    const auto nodes = mesh.element(e);
    for (int a = 0; a < npe; ++a) {
      const int d = mesh.dof(nodes[a]);
      t.local_dof[static_cast<std::size_t>(e) * npe + a] = d;
      if (d >= 0) ++counts[d + 1];
    }
  }
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  t.incidence_offset = counts;
  t.incidence_element.resize(counts.back());
  t.incidence_local.resize(counts.back());
  std::vector<int> cursor(counts.begin(), counts.end() - 1);
  for (int e = 0; e < ne; ++e) {
    for (int a = 0; a < npe; ++a) {
      const int d = t.local_dof[static_cast<std::size_t>(e) * npe + a];
      if (d < 0) continue;
      t.incidence_element[cursor[d]] = e;
      t.incidence_local[cursor[d]] = a;
      ++cursor[d];
    }
  }
  return t;
}

}  // namespace

std::string_view to_string(DomainKind kind) {
  return kind == DomainKind::interval ? "interval" : "rectangle";
}

DomainKind domain_kind_from_string(std::string_view name) {
  if (name == "interval") return DomainKind::interval;
  if (name == "rectangle") return DomainKind::rectangle;
  throw InvalidDomainError("unknown domain kind '" + std::string(name) + "'");
}

double Mesh::spacing(int axis) const {
  return bounds_.at(axis).length() / resolution_.at(axis);
}

double Mesh::measure() const {
  double m = 1.0;
  for (const auto& b : bounds_) m *= b.length();
  return m;
}

Mesh build_mesh(DomainKind kind, std::vector<AxisBounds> bounds, std::vector<int> resolution) {
  const std::size_t dim = kind == DomainKind::interval ? 1 : 2;
  if (bounds.size() != dim)
    throw InvalidDomainError("expected " + std::to_string(dim) + " axis bounds, got " +
                             std::to_string(bounds.size()));
  if (resolution.size() == 1 && dim == 2) resolution.push_back(resolution.front());
  if (resolution.size() != dim) throw ResolutionError("resolution does not match the dimension");
  for (const auto& b : bounds) {
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper))
      throw InvalidDomainError("axis bounds must be finite and strictly ordered, got (" +
                               std::to_string(b.lower) + ", " + std::to_string(b.upper) + ")");
  }
  for (int r : resolution)
    if (r < 2) throw ResolutionError("resolution must be at least 2, got " + std::to_string(r));

  Mesh mesh;
  mesh.kind_ = kind;
  mesh.bounds_ = std::move(bounds);
  mesh.resolution_ = std::move(resolution);

  const int nx = mesh.resolution_[0] + 1;
  const int ny = dim == 2 ? mesh.resolution_[1] + 1 : 1;
  const auto coordinate = [&](int axis, int i) {
    const AxisBounds& b = mesh.bounds_[axis];
    const int r = mesh.resolution_[axis];
    if (i == r) return b.upper;
    return b.lower + b.length() * static_cast<double>(i) / r;
  };

  mesh.nodes_.reserve(static_cast<std::size_t>(nx) * ny);
  mesh.dof_of_node_.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double y = dim == 2 ? coordinate(1, j) : 0.0;
      mesh.nodes_.push_back({coordinate(0, i), y});
      const bool boundary =
          i == 0 || i == nx - 1 || (dim == 2 && (j == 0 || j == ny - 1));
      if (boundary) {
        mesh.dof_of_node_.push_back(-1);
      } else {
        mesh.dof_of_node_.push_back(static_cast<int>(mesh.node_of_dof_.size()));
        mesh.node_of_dof_.push_back(j * nx + i);
      }
    }
  }

  if (dim == 1) {
    for (int i = 0; i + 1 < nx; ++i) {
      mesh.element_nodes_.push_back(i);
      mesh.element_nodes_.push_back(i + 1);
      mesh.element_measure_.push_back(mesh.nodes_[i + 1][0] - mesh.nodes_[i][0]);
    }
  } else {
    const double cell = mesh.spacing(0) * mesh.spacing(1);
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        const int base = j * nx + i;
        mesh.element_nodes_.insert(mesh.element_nodes_.end(),
                                   {base, base + 1, base + nx, base + nx + 1});
        mesh.element_measure_.push_back(cell);
      }
    }
  }

  Fnv1a h;
  h.add(static_cast<int>(kind));
  for (const auto& b : mesh.bounds_) {
    h.add(b.lower);
    h.add(b.upper);
  }
  for (int r : mesh.resolution_) h.add(r);
  mesh.id_ = h.value();
  return mesh;
}

Mesh build_mesh(DomainKind kind, std::vector<AxisBounds> bounds, int resolution) {
  const std::size_t dim = kind == DomainKind::interval ? 1 : 2;
  return build_mesh(kind, std::move(bounds), std::vector<int>(dim, resolution));
}

double infinity_norm(const SparseMatrix& a) {
  Vector row_sums = Vector::Zero(a.rows());
  for (Eigen::Index c = 0; c < a.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) row_sums[it.row()] += std::abs(it.value());
  return row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

void require_same_mesh(MeshId expected, MeshId actual, const char* context) {
  if (expected != actual)
    throw ProvenanceError(std::string(context) + ": field belongs to a different mesh");
}

FieldVector operator+(const FieldVector& lhs, const FieldVector& rhs) {
  require_same_mesh(lhs.mesh_id, rhs.mesh_id, "field addition");
  return {lhs.values + rhs.values, lhs.mesh_id};
}

FieldVector operator-(const FieldVector& lhs, const FieldVector& rhs) {
  require_same_mesh(lhs.mesh_id, rhs.mesh_id, "field subtraction");
  return {lhs.values - rhs.values, lhs.mesh_id};
}

FieldVector operator-(const FieldVector& v) { return {-v.values, v.mesh_id}; }

FieldVector operator*(double scale, const FieldVector& v) { return {scale * v.values, v.mesh_id}; }

DiscreteOperators assemble_operators(const Mesh& mesh) {
  DiscreteOperators ops;
  ops.mesh_ = std::make_shared<const Mesh>(mesh);
  ops.tables_ = build_tables(mesh);

  // 1D element matrices; 2D cells are their tensor products.
  const auto stiff1 = [](double h) {
    return std::array<std::array<double, 2>, 2>{{{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}}};
  };
  const auto mass1 = [](double h) {
    return std::array<std::array<double, 2>, 2>{{{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}}};
  };

  const int npe = mesh.nodes_per_element();
  std::array<double, 16> ke{};
  std::array<double, 16> me{};
  if (mesh.dimension() == 1) {
    const auto k = stiff1(mesh.spacing(0));
    const auto m = mass1(mesh.spacing(0));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        ke[a * 2 + b] = k[a][b];
        me[a * 2 + b] = m[a][b];
      }
  } else {
    const auto kx = stiff1(mesh.spacing(0));
    const auto mx = mass1(mesh.spacing(0));
    const auto ky = stiff1(mesh.spacing(1));
    const auto my = mass1(mesh.spacing(1));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const int ia = a & 1, ja = a >> 1, ib = b & 1, jb = b >> 1;
        ke[a * 4 + b] = kx[ia][ib] * my[ja][jb] + mx[ia][ib] * ky[ja][jb];
        me[a * 4 + b] = mx[ia][ib] * my[ja][jb];
      }
  }

  std::vector<Eigen::Triplet<double>> k_triplets;
  std::vector<Eigen::Triplet<double>> m_triplets;
  const int ne = mesh.element_count();
  k_triplets.reserve(static_cast<std::size_t>(ne) * npe * npe);
  m_triplets.reserve(static_cast<std::size_t>(ne) * npe * npe);
  for (int e = 0; e < ne; ++e) {
    for (int a = 0; a < npe; ++a) {
      const int da = ops.tables_.local_dof[static_cast<std::size_t>(e) * npe + a];
      if (da < 0) continue;
      for (int b = 0; b < npe; ++b) {
        const int db = ops.tables_.local_dof[static_cast<std::size_t>(e) * npe + b];
        if (db < 0) continue;
        k_triplets.emplace_back(da, db, ke[a * npe + b]);
        m_triplets.emplace_back(da, db, me[a * npe + b]);
      }
    }
  }
  const int n = mesh.interior_count();
  ops.stiffness_.resize(n, n);
  ops.mass_.resize(n, n);
  ops.stiffness_.setFromTriplets(k_triplets.begin(), k_triplets.end());
  ops.mass_.setFromTriplets(m_triplets.begin(), m_triplets.end());
  ops.stiffness_.makeCompressed();
  ops.mass_.makeCompressed();

  auto factor = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(ops.stiffness_);
  if (factor->info() != Eigen::Success) throw Error("stiffness matrix is not positive definite");
  ops.stiffness_factor_ = std::move(factor);
  return ops;
}

FieldVector DiscreteOperators::field(Vector values) const {
  if (values.size() != size())
    throw InvalidArgumentError("field has " + std::to_string(values.size()) +
                               " values, mesh has " + std::to_string(size()) + " interior nodes");
  return {std::move(values), mesh_id()};
}

FieldVector DiscreteOperators::zeros() const { return {Vector::Zero(size()), mesh_id()}; }

FieldVector DiscreteOperators::interpolate(const std::function<double(double, double)>& fn) const {
  Vector v(size());
  for (int d = 0; d < size(); ++d) {
    const auto& p = mesh_->node(mesh_->node_of_dof(d));
    v[d] = fn(p[0], p[1]);
  }
  return {std::move(v), mesh_id()};
}

Vector DiscreteOperators::apply_stiffness(const Vector& u) const {
  Vector y;
  kernels::parallel::symmetric_spmv(stiffness_, u, y);
  return y;
}

Vector DiscreteOperators::apply_mass(const Vector& u) const {
  Vector y;
  kernels::parallel::symmetric_spmv(mass_, u, y);
  return y;
}

double DiscreteOperators::energy(const FieldVector& u) const {
  require_same_mesh(mesh_id(), u.mesh_id, "energy");
  return energy(u.values);
}

double DiscreteOperators::energy(const Vector& u) const { return u.dot(apply_stiffness(u)); }

double DiscreteOperators::mass_inner(const Vector& u, const Vector& v) const {
  return u.dot(apply_mass(v));
}

Vector DiscreteOperators::solve_stiffness(const Vector& rhs) const {
  return stiffness_factor_->solve(rhs);
}

std::vector<double> DiscreteOperators::nodal_values(const FieldVector& u) const {
  require_same_mesh(mesh_id(), u.mesh_id, "nodal_values");
  std::vector<double> out(static_cast<std::size_t>(mesh_->node_count()), 0.0);
  for (int d = 0; d < size(); ++d) out[mesh_->node_of_dof(d)] = u.values[d];
  return out;
}

double integrate_power(const FieldVector& u, int p, const DiscreteOperators& ops) {
  require_same_mesh(ops.mesh_id(), u.mesh_id, "integrate_power");
  if (p < 1 || p > 4) throw InvalidArgumentError("integrate_power supports p in {1,2,3,4}");
  return kernels::parallel::integrate_power(ops, u.values, p);
}

}  // namespace kirchhoff
