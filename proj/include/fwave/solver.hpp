#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fwave/fraccalc.hpp"
#include "fwave/spectral.hpp"

namespace fwave {

/// Initial data: u(0) = a, d_t u(0) = b, on interior nodes.
struct SourcePair {
  Eigen::VectorXd a;
  Eigen::VectorXd b;

  int size() const { return static_cast<int>(a.size()); }
  /// Throws std::invalid_argument on size mismatch or non-finite entries.
  void validate(int n) const;
};

enum class Route { timestep, resolvent, spectral };

std::string to_string(Route route);
Route parse_route(const std::string& name);

/// u sampled at `times`: column k of `states` is u(times[k]).
struct SolutionField {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;
  double alpha = 0.0;
  Route route = Route::timestep;
  std::vector<std::pair<std::string, double>> parameters;

  int size() const { return static_cast<int>(states.rows()); }
  int sample_count() const { return static_cast<int>(times.size()); }
  Eigen::VectorXd state(int k) const { return states.col(k); }
};

/// Cotangent (Talbot-type) Bromwich contour, nodes counted on the full curve
///   p(theta) = shift + (nodes / t) (0.5017 theta cot(0.6407 theta) - 0.6122
///              + 0.2645 i theta),  -pi < theta < pi.
/// The shift is chosen per call so that every pole of the transform with
/// e^{Re(p) t} > 1e-6 lies inside; shift and the largest dropped weight are
/// reported in the metadata. Conjugate symmetry halves the solves.
struct LaplaceContour {
  int nodes = 48;
};

/// Implicit convolution-quadrature scheme (WaveDerivativeWeights) for
/// d_t^alpha (u - a - b t) = -A u, 1 < alpha < 2, on w = u - a - b t:
///   (omega_0 I + A) w_k = -(history) - A (a + b t_k),
/// with the start-up correction -A a / 2 added at k = 1. Second order.
/// Returns all K + 1 grid states; states(:, 0) = a.
SolutionField solve_timestep(const Eigen::MatrixXd& a_op, const SourcePair& s,
                             double alpha, const TimeGrid& grid);

/// Bromwich inversion of u^(p) = (p^alpha + A)^{-1} (p^{alpha-1} a +
/// p^{alpha-2} b) on a LaplaceContour. Times must be positive. Throws
/// NumericalError when the contour cannot avoid or enclose the poles
/// {p : -p^alpha in sigma(A)}.
SolutionField solve_resolvent(const Eigen::MatrixXd& a_op, const SourcePair& s,
                              double alpha, const std::vector<double>& times,
                              const LaplaceContour& contour = {});

/// Mode sum u(t) = sum_n [E_{alpha,1}(-lambda_n t^alpha) P_n a
///                        + t E_{alpha,2}(-lambda_n t^alpha) P_n b].
/// Refuses (NumericalError) clusters whose nilpotent part exceeds
/// `defect_tol` * max(1, |lambda_n|).
SolutionField solve_spectral_oracle(const RieszData& riesz, const SourcePair& s,
                                    double alpha,
                                    const std::vector<double>& times,
                                    double defect_tol = 1e-8);

/// Linear propagators: u(t) = Sa a + Sb b. Same algorithms as the vector
/// solvers, applied to identity data.
struct Propagators {
  Eigen::MatrixXd from_a;
  Eigen::MatrixXd from_b;
};

std::vector<Propagators> resolvent_propagators(const Eigen::MatrixXd& a_op,
                                               double alpha,
                                               const std::vector<double>& times,
                                               const LaplaceContour& contour = {});
std::vector<Propagators> spectral_propagators(const RieszData& riesz,
                                              double alpha,
                                              const std::vector<double>& times,
                                              double defect_tol = 1e-8);
/// Propagators at grid nodes nearest to `times` (each must coincide with a
/// node to 1e-9 T).
std::vector<Propagators> timestep_propagators(const Eigen::MatrixXd& a_op,
                                              double alpha, const TimeGrid& grid,
                                              const std::vector<double>& times);

/// max over shared samples of ||u1 - u2|| / max(||u2||, tiny).
double relative_difference(const SolutionField& u1, const SolutionField& u2);

/// Restricts a SolutionField to the samples closest to `times`.
SolutionField select_times(const SolutionField& u, const std::vector<double>& times);

struct LaplaceResidual {
  Complex p;
  double relative;    // ||p^a Lu - p^{a-1} a - p^{a-2} b + A Lu|| / ||data||
  double truncation;  // relative tail estimate
  bool inconclusive;  // truncation exceeds tol
};

/// Checks the Laplace-domain identity on a solution sampled on a uniform grid
/// starting at t = 0. Lu is computed with laplace_numeric per component.
std::vector<LaplaceResidual> laplace_identity_check(
    const SolutionField& u, const SourcePair& s, const Eigen::MatrixXd& a_op,
    double alpha, const std::vector<Complex>& p_samples, double tol);

/// u^(p) = (p^alpha + A)^{-1} (p^{alpha-1} a + p^{alpha-2} b) directly.
Eigen::VectorXcd transformed_solution(const Eigen::MatrixXd& a_op,
                                      const SourcePair& s, double alpha,
                                      Complex p);

struct GrowthFit {
  double c1 = 0.0;          // envelope constant, lifted so the bound holds
  double c2 = 0.0;          // exponential rate
  double fit_c1 = 0.0;      // least-squares intercept (exp)
  double max_violation = 0.0;  // max ||u|| / (fit_c1 e^{c2 t}) - 1 of the raw fit
  bool degenerate = false;     // zero solution
};

/// Least-squares fit of the upper concave hull of log ||u(t)|| against t,
/// then c1 is raised until ||u(t)|| <= c1 e^{c2 t} at every sample. Needs a
/// horizon of at least 5.
GrowthFit growth_probe(const SolutionField& u);

/// One row per sample: t, u_0, ..., u_{N-1}.
void write_solution_csv(std::ostream& out, const SolutionField& u);

}  // namespace fwave
