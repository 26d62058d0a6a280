#include "fwave/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace fwave {

Mesh::Mesh(Box domain, std::array<int, 2> interior_counts)
    : domain_(domain), counts_(interior_counts), spacing_{0.0, 0.0} {
  if (domain_.dim != 1 && domain_.dim != 2) {
    throw std::invalid_argument("Mesh: dimension must be 1 or 2");
  }
  if (domain_.dim == 1) counts_[1] = 1;
  for (int axis = 0; axis < domain_.dim; ++axis) {
    if (counts_[axis] < 2) {
      throw std::invalid_argument("Mesh: need at least 2 interior nodes per axis");
    }
    if (!(domain_.upper[axis] > domain_.lower[axis])) {
      throw std::invalid_argument("Mesh: empty domain");
    }
    spacing_[axis] =
        (domain_.upper[axis] - domain_.lower[axis]) / (counts_[axis] + 1);
  }
}

Mesh Mesh::interval(double lo, double hi, int interior) {
  return Mesh(Box::interval(lo, hi), {interior, 1});
}

Mesh Mesh::rectangle(double x0, double x1, double y0, double y1, int nx,
                     int ny) {
  return Mesh(Box::rectangle(x0, x1, y0, y1), {nx, ny});
}

std::array<double, 2> Mesh::point(int index) const {
  const int i = index % counts_[0];
  const int j = index / counts_[0];
  return lattice_point(i + 1, dim() == 1 ? 0 : j + 1);
}

int Mesh::lattice_size() const {
  return dim() == 1 ? lattice_count(0) : lattice_count(0) * lattice_count(1);
}

std::array<double, 2> Mesh::lattice_point(int i, int j) const {
  return {domain_.lower[0] + i * spacing_[0],
          dim() == 1 ? 0.0 : domain_.lower[1] + j * spacing_[1]};
}

CoefficientField CoefficientField::sample(const Mesh& mesh, const Function& a11,
                                          const Function& a12,
                                          const Function& a22,
                                          const Function& b1,
                                          const Function& b2, const Function& c,
                                          std::string description) {
  const int n = mesh.lattice_size();
  CoefficientField f;
  for (auto* field : {&f.a11, &f.a12, &f.a22, &f.b1, &f.b2, &f.c}) {
    field->resize(n);
  }
  const int ny = mesh.dim() == 1 ? 1 : mesh.lattice_count(1);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < mesh.lattice_count(0); ++i) {
      const auto [x, y] = mesh.lattice_point(i, j);
      const int idx = mesh.lattice_index(i, j);
      f.a11[idx] = a11(x, y);
      f.a12[idx] = a12(x, y);
      f.a22[idx] = a22(x, y);
      f.b1[idx] = b1(x, y);
      f.b2[idx] = b2(x, y);
      f.c[idx] = c(x, y);
    }
  }
  f.description = std::move(description);
  return f;
}

CoefficientField CoefficientField::constant(const Mesh& mesh, double b1,
                                            double b2, double c) {
  auto k = [](double v) { return [v](double, double) { return v; }; };
  return sample(mesh, k(1.0), k(0.0), k(1.0), k(b1), k(b2), k(c),
                "a=I, b=(" + std::to_string(b1) + "," + std::to_string(b2) +
                    "), c=" + std::to_string(c));
}

double check_ellipticity(const CoefficientField& coeffs, int dim) {
  if (dim == 1) return coeffs.a11.minCoeff();
  const Eigen::ArrayXd half_trace = 0.5 * (coeffs.a11 + coeffs.a22);
  const Eigen::ArrayXd radius =
      (0.25 * (coeffs.a11 - coeffs.a22).square() + coeffs.a12.square()).sqrt();
  return (half_trace - radius).minCoeff();
}

DiscreteOperator::DiscreteOperator(Eigen::MatrixXd matrix, Mesh mesh,
                                   CoefficientField coeffs)
    : matrix_(std::move(matrix)), mesh_(std::move(mesh)), coeffs_(std::move(coeffs)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != mesh_.dofs()) {
    throw std::invalid_argument("DiscreteOperator: matrix does not match mesh");
  }
}

DiscreteOperator assemble(const Mesh& mesh, const CoefficientField& coeffs) {
  const int lattice = mesh.lattice_size();
  for (const auto* field : {&coeffs.a11, &coeffs.a12, &coeffs.a22, &coeffs.b1,
                            &coeffs.b2, &coeffs.c}) {
    if (field->size() != lattice) {
      throw std::invalid_argument("assemble: coefficient samples do not match mesh");
    }
  }
  const double ellipticity = check_ellipticity(coeffs, mesh.dim());
  if (!(ellipticity > 0.0)) {
    throw std::invalid_argument("assemble: coefficients not uniformly elliptic (min eigenvalue " +
                                std::to_string(ellipticity) + ")");
  }
  const int n = mesh.dofs();
  if (n > kMaxDenseDofs) {
    throw std::invalid_argument("assemble: too many unknowns for dense storage");
  }

  const int nx = mesh.count(0);
  const int ny = mesh.dim() == 1 ? 1 : mesh.count(1);
  const double hx = mesh.spacing(0);
  const double hy = mesh.dim() == 1 ? 1.0 : mesh.spacing(1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);

  // Lattice (i, j) -> unknown index, or -1 on the boundary.
  auto unknown = [&](int i, int j) {
    if (i < 1 || i > nx) return -1;
    if (mesh.dim() == 1) return i - 1;
    if (j < 1 || j > ny) return -1;
    return (i - 1) + nx * (j - 1);
  };
  auto at = [&](const Eigen::ArrayXd& f, int i, int j) {
    return f[mesh.lattice_index(i, j)];
  };
  // Accumulates -coef * v(i, j) into row `row`; Dirichlet nodes drop out.
  auto add = [&](int row, int i, int j, double coef) {
    const int col = unknown(i, j);
    if (col >= 0) a(row, col) -= coef;
  };

  for (int jj = 0; jj < ny; ++jj) {
    for (int ii = 0; ii < nx; ++ii) {
      const int i = ii + 1;
      const int j = mesh.dim() == 1 ? 0 : jj + 1;
      const int row = unknown(i, j);

      // d_x(a11 d_x v) with midpoint averages.
      const double ae = 0.5 * (at(coeffs.a11, i, j) + at(coeffs.a11, i + 1, j));
      const double aw = 0.5 * (at(coeffs.a11, i, j) + at(coeffs.a11, i - 1, j));
      add(row, i + 1, j, ae / (hx * hx));
      add(row, i - 1, j, aw / (hx * hx));
      add(row, i, j, -(ae + aw) / (hx * hx));

      // b1 d_x v.
      const double bx = at(coeffs.b1, i, j) / (2.0 * hx);
      add(row, i + 1, j, bx);
      add(row, i - 1, j, -bx);

      add(row, i, j, at(coeffs.c, i, j));

      if (mesh.dim() == 2) {
        const double an = 0.5 * (at(coeffs.a22, i, j) + at(coeffs.a22, i, j + 1));
        const double as = 0.5 * (at(coeffs.a22, i, j) + at(coeffs.a22, i, j - 1));
        add(row, i, j + 1, an / (hy * hy));
        add(row, i, j - 1, as / (hy * hy));
        add(row, i, j, -(an + as) / (hy * hy));

        const double by = at(coeffs.b2, i, j) / (2.0 * hy);
        add(row, i, j + 1, by);
        add(row, i, j - 1, -by);

        // d_x(a12 d_y v) + d_y(a12 d_x v), centered.
        const double q = 1.0 / (4.0 * hx * hy);
        const double e = at(coeffs.a12, i + 1, j), w = at(coeffs.a12, i - 1, j);
        const double nn = at(coeffs.a12, i, j + 1), s = at(coeffs.a12, i, j - 1);
        add(row, i + 1, j + 1, q * (e + nn));
        add(row, i + 1, j - 1, -q * (e + s));
        add(row, i - 1, j + 1, -q * (w + nn));
        add(row, i - 1, j - 1, q * (w + s));
      }
    }
  }
  return DiscreteOperator(std::move(a), mesh, coeffs);
}

std::vector<int> subdomain_indices(const Mesh& mesh, const Box& box) {
  if (box.dim != mesh.dim()) {
    throw std::invalid_argument("subdomain_indices: box dimension mismatch");
  }
  constexpr double kSlack = 1e-12;
  std::vector<int> out;
  for (int idx = 0; idx < mesh.dofs(); ++idx) {
    const auto p = mesh.point(idx);
    bool inside = true;
    for (int axis = 0; axis < mesh.dim(); ++axis) {
      inside = inside && p[axis] >= box.lower[axis] - kSlack &&
               p[axis] <= box.upper[axis] + kSlack;
    }
    if (inside) out.push_back(idx);
  }
  if (out.empty()) {
    throw std::invalid_argument("subdomain_indices: box contains no interior node");
  }
  return out;
}

void write_operator(std::ostream& out, const DiscreteOperator& op) {
  const Mesh& mesh = op.mesh();
  nlohmann::json header = {
      {"d", mesh.dim()},
      {"N", op.size()},
      {"h", mesh.dim() == 1 ? nlohmann::json::array({mesh.spacing(0)})
                            : nlohmann::json::array({mesh.spacing(0), mesh.spacing(1)})},
      {"coefficients", op.coefficients().description},
      {"format", "row col value (0-based)"},
  };
  out << header.dump() << '\n';
  const auto old = out.precision(17);
  const Eigen::MatrixXd& a = op.matrix();
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      if (a(r, c) != 0.0) out << r << ' ' << c << ' ' << a(r, c) << '\n';
    }
  }
  out.precision(old);
}

}  // namespace fwave
