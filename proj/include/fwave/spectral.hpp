#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fwave {

using Complex = std::complex<double>;

/// Raised when a numerical precondition fails (contour meets the spectrum,
/// solver breakdown, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One group of eigenvalues treated as a single isolated point of the spectrum.
struct Cluster {
  Complex center;    // mean of the member eigenvalues
  double radius;     // contour radius gamma_n
  int multiplicity;  // number of eigenvalues merged (eigensolver count)
};

struct Eigensystem {
  std::vector<Cluster> clusters;  // sorted by (Re, Im) of the center
  Eigen::VectorXcd eigenvalues;   // raw eigensolver output
  double cluster_tol;
};

/// 1e-6 * ||A||_2, the default merge distance.
double default_cluster_tol(const Eigen::MatrixXd& a);

/// General eigensolve followed by single-linkage clustering at `cluster_tol`.
/// Contour radius: half the distance to the nearest other center, at least
/// 10 * cluster_tol and at least twice the cluster's own spread. A lone
/// cluster gets max(10 * cluster_tol, 0.5 * max(1, |center|)).
Eigensystem eigendecompose(const Eigen::MatrixXd& a,
                           std::optional<double> cluster_tol = std::nullopt);

struct RieszProjector {
  Complex center;
  double radius;
  int rank;                  // d_n, numerical rank of P at 1e-8 * ||P||
  Eigen::MatrixXcd projector;  // P_n
  Eigen::MatrixXcd nilpotent;  // D_n
};

struct RieszData {
  std::vector<RieszProjector> clusters;
  int contour_nodes;
};

inline constexpr int kDefaultContourNodes = 64;

/// P = (1/2 pi i) oint (z - A)^{-1} dz and D = (1/2 pi i) oint (z - center)
/// (z - A)^{-1} dz over the circle |z - center| = radius, trapezoid rule with
/// `nodes` points. Each node costs one LU of (z I - A). Throws NumericalError
/// when a node lies numerically on the spectrum.
RieszProjector riesz_projection(const Eigen::MatrixXcd& a, Complex center,
                                double radius,
                                int nodes = kDefaultContourNodes);

RieszData riesz_data(const Eigen::MatrixXd& a, const Eigensystem& eig,
                     int nodes = kDefaultContourNodes);

/// Max-norm residuals of P^2 = P, D = (A - lambda) P, DP = PD, D^d P = 0.
struct IdentityReport {
  Complex center;
  int rank;
  double idempotent;
  double nilpotent_definition;
  double commute;
  double nilpotent_power;
  bool pass;

  double worst() const;
};

std::vector<IdentityReport> verify_identities(const Eigen::MatrixXd& a,
                                              const RieszData& data,
                                              double tol);

struct Lemma3Result {
  int k0;           // 0 when P phi vanishes
  double residual;  // ||(A - lambda) D^{k0-1} P phi||
  double relative;  // residual / ||P phi||
  std::string note;
};

/// Smallest k0 >= 1 with ||D^k0 P phi|| <= tol ||P phi||, and the residual of
/// (A - lambda) D^{k0-1} P phi = 0. Throws NumericalError if no k0 <= rank
/// exists.
Lemma3Result lemma3_check(const Eigen::MatrixXd& a, const RieszProjector& cluster,
                          const Eigen::VectorXcd& phi, double tol);

/// ||sum_n P_n - I|| in max norm.
double completeness_defect(const RieszData& data);

/// Re, Im, d_n, gamma_n and the four identity residuals per cluster.
void write_spectrum_csv(std::ostream& out, const RieszData& data,
                        const std::vector<IdentityReport>& reports);

/// Numerical rank: singular values above rel_tol * sigma_max.
int numerical_rank(const Eigen::MatrixXcd& m, double rel_tol);

}  // namespace fwave
