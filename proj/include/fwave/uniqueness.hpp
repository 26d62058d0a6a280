#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fwave/solver.hpp"
#include "fwave/spectral.hpp"

namespace fwave {

/// Which samples of u are observed: u(x_i, t_k) for i in omega, k in times.
struct ObservationSetup {
  std::vector<int> omega;      // interior node indices, strictly increasing
  std::vector<double> times;   // strictly increasing, positive
  Route route = Route::spectral;
  int timestep_steps = 1024;   // K on (0, times.back()]; times must be nodes
  LaplaceContour contour;

  /// Throws std::invalid_argument unless the setup fits an N-node operator.
  void validate(int n) const;
  int rows() const { return static_cast<int>(omega.size() * times.size()); }
};

/// Matrix of (a, b) -> observed samples.
///
/// Rows are time-major: row k * |omega| + i holds u(x_omega[i], t_k).
/// Columns 0..N-1 are unit a-sources, columns N..2N-1 unit b-sources.
struct ObservationMap {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd left;             // thin U
  Eigen::MatrixXd right;            // V
  ObservationSetup setup;

  int unknowns() const { return static_cast<int>(matrix.cols()); }
};

/// Forward-solves unit sources on the chosen route and takes a full SVD.
/// The spectral route uses `riesz` when given, else computes it.
ObservationMap build_observation_map(const Eigen::MatrixXd& a_op, double alpha,
                                     const ObservationSetup& setup,
                                     const RieszData* riesz = nullptr);

/// Restriction of a SolutionField to the setup's nodes and times, in the
/// row order of ObservationMap.
Eigen::VectorXd observe(const SolutionField& u, const ObservationSetup& setup);

struct InjectivityReport {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double ratio = 0.0;      // sigma_min / sigma_max
  double condition = 0.0;  // sigma_max / sigma_min (inf when singular)
  double rank_tol = 0.0;   // absolute threshold used for the rank
  int rank = 0;
  int unknowns = 0;
  bool injective = false;
  std::string verdict;     // "injective" or "not injective"
};

/// Numerical rank with threshold rel_tol * sigma_max; the default rel_tol is
/// max(rows, cols) * machine epsilon.
InjectivityReport injectivity_report(const ObservationMap& m,
                                     std::optional<double> rel_tol = std::nullopt);

/// Chebyshev points of the first kind on [lo, hi], ascending.
std::vector<double> chebyshev_points(double lo, double hi, int count);

/// `count` Chebyshev points on [r - 1 - w, r - 1], r = min Re sigma(A),
/// w = max(1, spread of Re sigma(A)).
std::vector<Complex> default_resolvent_samples(const Eigen::MatrixXd& a_op, int count);

struct ResolventVanishing {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  Eigen::VectorXd kernel_candidate;  // right singular vector of sigma_min
  double min_distance = 0.0;         // min |z - lambda| over samples
};

/// Stacks a -> [(A - z_k)^{-1} a restricted to omega]_k (real and imaginary
/// parts as separate rows) and reports its extreme singular values. Throws
/// std::invalid_argument for an empty list and NumericalError when a sample
/// is within 1e-8 max(1, ||A||) of the spectrum.
ResolventVanishing resolvent_vanishing_check(const Eigen::MatrixXd& a_op,
                                             const std::vector<int>& omega,
                                             const std::vector<Complex>& z_samples);

struct ClusterCascade {
  Complex center;
  int rank = 0;
  std::vector<double> omega_norms;  // ||(D^l P a)|_omega||, l = 0..d-1
  std::vector<double> full_norms;   // ||D^l P a||
  std::vector<double> descent;      // ||(A - lambda) D^l P a - D^{l+1} P a||
  bool vanishes_on_omega = false;
  bool uc_violation = false;        // zero on omega but not in the domain
};

struct CascadeReport {
  bool tested = false;  // false: no kernel vector, check is vacuous
  std::string note;
  Eigen::VectorXd a;
  std::vector<ClusterCascade> clusters;
  bool uc_violation = false;
};

/// Runs the projection cascade on `a`: for every cluster the sizes of
/// D^l P a on omega and in the whole domain, and the descent residuals.
/// Quantities are compared against tol * max(||a||, tiny).
CascadeReport projection_cascade_check(const Eigen::MatrixXd& a_op,
                                       const RieszData& riesz,
                                       const Eigen::VectorXd& a,
                                       const std::vector<int>& omega, double tol);

/// Looks for a with (A - z)^{-1} a = 0 on omega for all samples
/// (sigma_min <= tol * sigma_max) and runs the cascade on it; otherwise
/// returns an untested report noting that no kernel vector exists.
CascadeReport projection_cascade_from_kernel(const Eigen::MatrixXd& a_op,
                                             const RieszData& riesz,
                                             const std::vector<int>& omega,
                                             const std::vector<Complex>& z_samples,
                                             double tol);

/// Unit vector supported on omega.
struct ProbeVector {
  Eigen::VectorXd psi;

  /// Normalizes `values` (one per omega node) and scatters them.
  static ProbeVector on(const std::vector<int>& omega, int n,
                        const Eigen::VectorXd& values);
};

/// Unit vectors at each omega node, then one seeded random unit vector.
std::vector<ProbeVector> default_probes(const std::vector<int>& omega, int n,
                                        std::uint64_t seed);

struct BranchRow {
  Complex eta;
  Complex f;  // <(A - eta)^{-1} a, psi>
  Complex g;  // <(A - eta)^{-1} b, psi>
  double residual;  // |(-eta)^{1/alpha} f + g|, principal branch
};

std::vector<BranchRow> branch_identity_probe(const Eigen::MatrixXd& a_op,
                                             const Eigen::VectorXd& a,
                                             const Eigen::VectorXd& b,
                                             const ProbeVector& psi, double alpha,
                                             const std::vector<Complex>& etas);

struct Regularization {
  enum class Kind { tikhonov, truncated_svd };
  Kind kind = Kind::tikhonov;
  std::optional<double> lambda;  // default 1e-8 * sigma_max^2
  int truncation = 0;            // kept singular values for truncated_svd
};

struct Recovery {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  double residual = 0.0;           // ||M x - data||
  double relative_residual = 0.0;  // residual / ||data||
  double effective_condition = 0.0;
  double lambda = 0.0;             // Tikhonov parameter used (0 for TSVD)
  int kept = 0;                    // singular values used (TSVD)
};

Recovery invert_source(const ObservationMap& m, const Eigen::VectorXd& data,
                       const Regularization& reg = {});

/// data + level * max|data| * xi with xi standard normal from mt19937_64(seed).
Eigen::VectorXd add_relative_noise(const Eigen::VectorXd& data, double level,
                                   std::uint64_t seed);

void write_singular_values_csv(std::ostream& out, const ObservationMap& m);
void write_injectivity_json(std::ostream& out, const InjectivityReport& r);
/// Columns: node, a_true, b_true, a_hat, b_hat.
void write_recovery_csv(std::ostream& out, const SourcePair& truth,
                        const Recovery& rec);

}  // namespace fwave
