#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fwave {

/// Axis-aligned box [lower, upper] in one or two dimensions.
struct Box {
  int dim = 1;
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{1.0, 1.0};

  static Box interval(double lo, double hi) { return {1, {lo, 0.0}, {hi, 0.0}}; }
  static Box rectangle(double x0, double x1, double y0, double y1) {
    return {2, {x0, y0}, {x1, y1}};
  }
};

/// Uniform grid on a box. Unknowns live on interior nodes, numbered with x
/// fastest; boundary nodes carry the homogeneous Dirichlet value.
class Mesh {
 public:
  Mesh(Box domain, std::array<int, 2> interior_counts);
  static Mesh interval(double lo, double hi, int interior);
  static Mesh rectangle(double x0, double x1, double y0, double y1, int nx,
                        int ny);

  int dim() const { return domain_.dim; }
  const Box& domain() const { return domain_; }
  int count(int axis) const { return counts_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  /// Number of unknowns N.
  int dofs() const { return dim() == 1 ? counts_[0] : counts_[0] * counts_[1]; }
  /// Coordinates of interior node `index`.
  std::array<double, 2> point(int index) const;

  // The full lattice includes boundary nodes: (count + 2) points per axis.
  int lattice_count(int axis) const { return counts_[axis] + 2; }
  int lattice_size() const;
  std::array<double, 2> lattice_point(int i, int j) const;
  int lattice_index(int i, int j) const { return i + lattice_count(0) * j; }

 private:
  Box domain_;
  std::array<int, 2> counts_;
  std::array<double, 2> spacing_;
};

/// Node samples of the coefficients on the full lattice of a mesh.
/// a12 and the y-components are ignored in 1D.
struct CoefficientField {
  Eigen::ArrayXd a11, a12, a22;
  Eigen::ArrayXd b1, b2;
  Eigen::ArrayXd c;
  std::string description;

  using Function = std::function<double(double, double)>;
  static CoefficientField sample(const Mesh& mesh, const Function& a11,
                                 const Function& a12, const Function& a22,
                                 const Function& b1, const Function& b2,
                                 const Function& c,
                                 std::string description = {});
  /// a = identity, b = (b1, b2), c constant.
  static CoefficientField constant(const Mesh& mesh, double b1 = 0.0,
                                   double b2 = 0.0, double c = 0.0);
};

/// Smallest eigenvalue of the symmetric matrix (a_ij) over all nodes.
double check_ellipticity(const CoefficientField& coeffs, int dim);

/// Dense matrix of A, i.e. minus the discretized divergence-form operator
/// sum d_i(a_ij d_j v) + sum b_j d_j v + c v, on interior nodes.
class DiscreteOperator {
 public:
  DiscreteOperator(Eigen::MatrixXd matrix, Mesh mesh, CoefficientField coeffs);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Mesh& mesh() const { return mesh_; }
  const CoefficientField& coefficients() const { return coeffs_; }
  int size() const { return static_cast<int>(matrix_.rows()); }

 private:
  Eigen::MatrixXd matrix_;
  Mesh mesh_;
  CoefficientField coeffs_;
};

/// Largest N accepted by assemble (dense storage).
inline constexpr int kMaxDenseDofs = 4096;

/// Second-order finite differences: midpoint-averaged a_ij for the diagonal
/// diffusion terms, centered stencils for the mixed term and for b_j d_j,
/// c on the diagonal; Dirichlet neighbours eliminated. Throws
/// std::invalid_argument on shape mismatch or when the smallest eigenvalue of
/// (a_ij) is not positive.
DiscreteOperator assemble(const Mesh& mesh, const CoefficientField& coeffs);

/// Interior nodes inside `box` (closed, 1e-12 slack), in ascending index
/// order. Throws std::invalid_argument if none are.
std::vector<int> subdomain_indices(const Mesh& mesh, const Box& box);

/// JSON header line followed by "row col value" lines for nonzero entries.
void write_operator(std::ostream& out, const DiscreteOperator& op);

}  // namespace fwave
