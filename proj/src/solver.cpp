#include "fwave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace fwave {

namespace {

constexpr double kPi = std::numbers::pi;

// Cotangent contour parameters (Weideman-Trefethen optimized values).
constexpr double kSigma = 0.6122, kMu = 0.5017, kA = 0.6407, kNu = 0.2645;

void require_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) {
    throw std::invalid_argument("alpha must satisfy 1 < alpha < 2, got " +
                                std::to_string(alpha));
  }
}

void require_square(const Eigen::MatrixXd& a_op, int n) {
  if (a_op.rows() != a_op.cols() || a_op.rows() != n) {
    throw std::invalid_argument("operator size does not match data");
  }
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite values");
}

// Poles of (p^alpha + lambda)^{-1} on the principal sheet.
std::vector<Complex> transform_poles(const Eigen::VectorXcd& eigenvalues,
                                     double alpha) {
  std::vector<Complex> poles;
  for (const Complex& lambda : eigenvalues) {
    if (std::abs(lambda) == 0.0) continue;  // branch point, always enclosed
    const double r = std::pow(std::abs(lambda), 1.0 / alpha);
    const double phi = std::arg(-lambda);
    for (int k = -1; k <= 1; ++k) {
      const double theta = (phi + 2.0 * kPi * k) / alpha;
      if (std::abs(theta) < kPi) poles.push_back(std::polar(r, theta));
    }
  }
  return poles;
}

// Poles left outside the contour contribute residues bounded by
// e^{Re(p) t} / alpha times the data; below this weight they are dropped.
constexpr double kResidueCutoff = 1e-6;

struct Contour {
  double shift;
  double scale;
  int nodes;
  double excluded;  // largest e^{Re(p) t} over poles outside the contour

  Complex point(double theta) const {
    return shift + scale * Complex(kMu * theta / std::tan(kA * theta) - kSigma,
                                   kNu * theta);
  }
  Complex derivative(double theta) const {
    const double sn = std::sin(kA * theta);
    return scale * Complex(kMu * (1.0 / std::tan(kA * theta) -
                                  kA * theta / (sn * sn)),
                           kNu);
  }
  bool encloses(Complex p) const {
    const double theta = p.imag() / (scale * kNu);
    if (std::abs(theta) >= kPi) return false;
    const double edge =
        theta == 0.0 ? shift + scale * (kMu / kA - kSigma) : point(theta).real();
    return p.real() < edge;
  }
};

// Picks the shift so that all poles whose residue e^{Re(p) t} is not
// negligible are enclosed.
Contour make_contour(const std::vector<Complex>& poles, double t, int nodes) {
  if (nodes < 4 || nodes % 2 != 0) {
    throw std::invalid_argument("LaplaceContour: node count must be even and >= 4");
  }
  Contour c{0.0, nodes / t, nodes, 0.0};
  auto significant = [&](Complex p) { return p.real() * t > std::log(kResidueCutoff); };
  for (int attempt = 0; attempt < 4; ++attempt) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const Complex& p : poles) {
      if (significant(p) && !c.encloses(p)) worst = std::max(worst, p.real());
    }
    if (std::isinf(worst)) {
      for (const Complex& p : poles) {
        if (!c.encloses(p)) c.excluded = std::max(c.excluded, std::exp(p.real() * t));
      }
      return c;
    }
    c.shift = std::max(c.shift, worst) + 1.0 / t;
  }
  throw NumericalError(
      "solve_resolvent: contour cannot enclose the generalized spectrum "
      "{p : -p^alpha in sigma(A)}");
}

// u(t) for data matrices (columns are independent right-hand sides).
Eigen::MatrixXd bromwich(const Eigen::MatrixXd& a_op,
                         const std::vector<Complex>& poles, double alpha,
                         double t, int nodes, const Eigen::MatrixXd& data_a,
                         const Eigen::MatrixXd& data_b, Contour* used) {
  const Contour c = make_contour(poles, t, nodes);
  if (used) *used = c;
  const int n = static_cast<int>(a_op.rows());
  const Eigen::MatrixXcd ac = a_op.cast<Complex>();
  const Eigen::MatrixXcd da = data_a.cast<Complex>();
  const Eigen::MatrixXcd db = data_b.cast<Complex>();
  const double h = 2.0 * kPi / nodes;
  const double a_norm = std::max(1.0, a_op.cwiseAbs().rowwise().sum().maxCoeff());
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, data_a.cols());
  // Conjugate symmetry: only theta > 0 is evaluated; the sum is ordered.
  for (int k = nodes / 2; k < nodes; ++k) {
    const double theta = -kPi + (k + 0.5) * h;
    const Complex p = c.point(theta);
    const Complex pa = std::pow(p, alpha);
    Eigen::MatrixXcd shifted = ac;
    shifted.diagonal().array() += pa;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
    const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot > 1e-13 * a_norm) || !(lu.rcond() > 1e-14)) {
      throw NumericalError("solve_resolvent: contour node p = (" +
                           std::to_string(p.real()) + ", " + std::to_string(p.imag()) +
                           ") collides with the generalized spectrum");
    }
    const Eigen::MatrixXcd rhs =
        (std::pow(p, alpha - 1.0) * da + std::pow(p, alpha - 2.0) * db);
    acc += (std::exp(p * t) * c.derivative(theta)) * lu.solve(rhs);
  }
  return (acc.imag() * (h / kPi));
}

Eigen::VectorXcd eigenvalues_of(const Eigen::MatrixXd& a_op) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a_op, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("solve_resolvent: eigensolver failed");
  }
  return es.eigenvalues();
}

void require_positive_times(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("no output times");
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("output times must be positive");
    }
  }
}

// Timestep states for data matrices; returns w_k + a + b t_k for every k.
std::vector<Eigen::MatrixXd> timestep_states(const Eigen::MatrixXd& a_op,
                                             double alpha, const TimeGrid& grid,
                                             const Eigen::MatrixXd& data_a,
                                             const Eigen::MatrixXd& data_b) {
  require_alpha(alpha);
  const int n = static_cast<int>(a_op.rows());
  const int steps = grid.steps();
  const WaveDerivativeWeights weights(alpha, grid.dt(), steps);
  auto factor = [&](double lead) {
    Eigen::MatrixXd m = a_op;
    m.diagonal().array() += lead;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if (!(lu.rcond() > 1e-14)) {
      throw NumericalError("solve_timestep: singular step matrix");
    }
    return lu;
  };
  const auto step = factor(weights.leading());

  std::vector<Eigen::MatrixXd> w(steps + 1, Eigen::MatrixXd::Zero(n, data_a.cols()));
  std::vector<Eigen::MatrixXd> u(steps + 1);
  u[0] = data_a;
  const Eigen::MatrixXd a_times_a = a_op * data_a;
  const Eigen::MatrixXd a_times_b = a_op * data_b;
  Eigen::MatrixXd rhs(n, data_a.cols());
  for (int k = 1; k <= steps; ++k) {
    rhs = -a_times_a - grid.node(k) * a_times_b;
    if (k == 1) rhs -= WaveDerivativeWeights::kStartCorrection * a_times_a;
    weights.history_sum(k, rhs, [&](int j) { return -w[j]; });
    w[k] = step.solve(rhs);
    if (!w[k].allFinite()) {
      throw NumericalError("solve_timestep: non-finite state at step " + std::to_string(k));
    }
    u[k] = w[k] + data_a + grid.node(k) * data_b;
  }
  return u;
}

int nearest_node(const TimeGrid& grid, double t) {
  const int k = static_cast<int>(std::lround(t / grid.dt()));
  if (k < 0 || k > grid.steps() ||
      std::abs(grid.node(k) - t) > 1e-9 * grid.final_time()) {
    throw std::invalid_argument("sample time " + std::to_string(t) +
                                " is not a grid node");
  }
  return k;
}

void require_diagonalizable(const RieszData& riesz, double defect_tol) {
  for (const RieszProjector& c : riesz.clusters) {
    const double defect = c.nilpotent.cwiseAbs().maxCoeff();
    if (defect > defect_tol * std::max(1.0, std::abs(c.center))) {
      throw NumericalError(
          "solve_spectral_oracle: cluster at (" + std::to_string(c.center.real()) +
          ", " + std::to_string(c.center.imag()) +
          ") is defective; the mode-sum oracle does not apply");
    }
  }
}

}  // namespace

void SourcePair::validate(int n) const {
  if (a.size() != n || b.size() != n) {
    throw std::invalid_argument("SourcePair: expected vectors of length " +
                                std::to_string(n));
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("SourcePair: non-finite entries");
  }
}

std::string to_string(Route route) {
  switch (route) {
    case Route::timestep: return "timestep";
    case Route::resolvent: return "resolvent";
    case Route::spectral: return "spectral";
  }
  return "unknown";
}

Route parse_route(const std::string& name) {
  if (name == "timestep") return Route::timestep;
  if (name == "resolvent") return Route::resolvent;
  if (name == "spectral") return Route::spectral;
  throw std::invalid_argument("unknown route '" + name + "'");
}

SolutionField solve_timestep(const Eigen::MatrixXd& a_op, const SourcePair& s,
                             double alpha, const TimeGrid& grid) {
  s.validate(s.size());
  require_square(a_op, s.size());
  const std::vector<Eigen::MatrixXd> u = timestep_states(a_op, alpha, grid, s.a, s.b);
  SolutionField out;
  out.times = grid.nodes();
  out.states.resize(s.size(), grid.node_count());
  for (int k = 0; k < grid.node_count(); ++k) out.states.col(k) = u[k].col(0);
  out.alpha = alpha;
  out.route = Route::timestep;
  out.parameters = {{"T", grid.final_time()}, {"K", grid.steps()}};
  return out;
}

SolutionField solve_resolvent(const Eigen::MatrixXd& a_op, const SourcePair& s,
                              double alpha, const std::vector<double>& times,
                              const LaplaceContour& contour) {
  require_alpha(alpha);
  s.validate(s.size());
  require_square(a_op, s.size());
  require_positive_times(times);
  const std::vector<Complex> poles = transform_poles(eigenvalues_of(a_op), alpha);
  SolutionField out;
  out.times = Eigen::Map<const Eigen::VectorXd>(times.data(), times.size());
  out.states.resize(s.size(), times.size());
  double max_shift = 0.0, max_excluded = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    Contour used{};
    out.states.col(k) =
        bromwich(a_op, poles, alpha, times[k], contour.nodes, s.a, s.b, &used).col(0);
    max_shift = std::max(max_shift, used.shift);
    max_excluded = std::max(max_excluded, used.excluded);
  }
  require_finite(out.states, "solve_resolvent");
  out.alpha = alpha;
  out.route = Route::resolvent;
  out.parameters = {{"contour_nodes", contour.nodes},
                    {"scale_times_t_over_nodes", 1.0},
                    {"sigma", kSigma},
                    {"mu", kMu},
                    {"a", kA},
                    {"nu", kNu},
                    {"max_shift", max_shift},
                    {"max_excluded_residue_weight", max_excluded}};
  return out;
}

std::vector<Propagators> resolvent_propagators(const Eigen::MatrixXd& a_op,
                                               double alpha,
                                               const std::vector<double>& times,
                                               const LaplaceContour& contour) {
  require_alpha(alpha);
  require_square(a_op, static_cast<int>(a_op.rows()));
  require_positive_times(times);
  const int n = static_cast<int>(a_op.rows());
  const std::vector<Complex> poles = transform_poles(eigenvalues_of(a_op), alpha);
  Eigen::MatrixXd da = Eigen::MatrixXd::Zero(n, 2 * n), db = da;
  da.leftCols(n).setIdentity();
  db.rightCols(n).setIdentity();
  std::vector<Propagators> out;
  for (double t : times) {
    const Eigen::MatrixXd u = bromwich(a_op, poles, alpha, t, contour.nodes, da, db, nullptr);
    require_finite(u, "resolvent_propagators");
    out.push_back({u.leftCols(n), u.rightCols(n)});
  }
  return out;
}

std::vector<Propagators> spectral_propagators(const RieszData& riesz,
                                              double alpha,
                                              const std::vector<double>& times,
                                              double defect_tol) {
  require_alpha(alpha);
  require_diagonalizable(riesz, defect_tol);
  if (riesz.clusters.empty()) throw std::invalid_argument("empty spectral data");
  const int n = static_cast<int>(riesz.clusters.front().projector.rows());
  std::vector<Propagators> out;
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("times must be non-negative");
    Eigen::MatrixXcd sa = Eigen::MatrixXcd::Zero(n, n), sb = sa;
    const double ta = std::pow(t, alpha);
    for (const RieszProjector& c : riesz.clusters) {
      const Complex z = -c.center * ta;
      sa += mittag_leffler(alpha, 1.0, z) * c.projector;
      sb += (t * mittag_leffler(alpha, 2.0, z)) * c.projector;
    }
    out.push_back({sa.real(), sb.real()});
  }
  return out;
}

SolutionField solve_spectral_oracle(const RieszData& riesz, const SourcePair& s,
                                    double alpha,
                                    const std::vector<double>& times,
                                    double defect_tol) {
  require_alpha(alpha);
  require_diagonalizable(riesz, defect_tol);
  if (riesz.clusters.empty()) throw std::invalid_argument("empty spectral data");
  s.validate(static_cast<int>(riesz.clusters.front().projector.rows()));
  if (times.empty()) throw std::invalid_argument("no output times");
  std::vector<Eigen::VectorXcd> pa, pb;
  for (const RieszProjector& c : riesz.clusters) {
    pa.push_back(c.projector * s.a.cast<Complex>());
    pb.push_back(c.projector * s.b.cast<Complex>());
  }
  SolutionField out;
  out.times = Eigen::Map<const Eigen::VectorXd>(times.data(), times.size());
  out.states.resize(s.size(), times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (!(t >= 0.0)) throw std::invalid_argument("times must be non-negative");
    const double ta = std::pow(t, alpha);
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(s.size());
    for (std::size_t n = 0; n < riesz.clusters.size(); ++n) {
      const Complex z = -riesz.clusters[n].center * ta;
      u += mittag_leffler(alpha, 1.0, z) * pa[n] + (t * mittag_leffler(alpha, 2.0, z)) * pb[n];
    }
    out.states.col(k) = u.real();
  }
  require_finite(out.states, "solve_spectral_oracle");
  out.alpha = alpha;
  out.route = Route::spectral;
  out.parameters = {{"clusters", static_cast<double>(riesz.clusters.size())},
                    {"contour_nodes", riesz.contour_nodes}};
  return out;
}

std::vector<Propagators> timestep_propagators(const Eigen::MatrixXd& a_op,
                                              double alpha, const TimeGrid& grid,
                                              const std::vector<double>& times) {
  const int n = static_cast<int>(a_op.rows());
  require_square(a_op, n);
  std::vector<int> nodes;
  for (double t : times) nodes.push_back(nearest_node(grid, t));
  Eigen::MatrixXd da = Eigen::MatrixXd::Zero(n, 2 * n), db = da;
  da.leftCols(n).setIdentity();
  db.rightCols(n).setIdentity();
  const std::vector<Eigen::MatrixXd> u = timestep_states(a_op, alpha, grid, da, db);
  std::vector<Propagators> out;
  for (int k : nodes) out.push_back({u[k].leftCols(n), u[k].rightCols(n)});
  return out;
}

double relative_difference(const SolutionField& u1, const SolutionField& u2) {
  if (u1.sample_count() != u2.sample_count() || u1.size() != u2.size()) {
    throw std::invalid_argument("relative_difference: shape mismatch");
  }
  double worst = 0.0;
  for (int k = 0; k < u1.sample_count(); ++k) {
    if (std::abs(u1.times[k] - u2.times[k]) > 1e-9 * std::max(1.0, std::abs(u2.times[k]))) {
      throw std::invalid_argument("relative_difference: sample times differ");
    }
    const double denom = std::max(u2.states.col(k).norm(), 1e-300);
    worst = std::max(worst, (u1.states.col(k) - u2.states.col(k)).norm() / denom);
  }
  return worst;
}

SolutionField select_times(const SolutionField& u, const std::vector<double>& times) {
  SolutionField out = u;
  out.times.resize(times.size());
  out.states.resize(u.size(), times.size());
  const double span = std::max(1.0, u.times.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < times.size(); ++i) {
    Eigen::Index k;
    (u.times.array() - times[i]).abs().minCoeff(&k);
    if (std::abs(u.times[k] - times[i]) > 1e-9 * span) {
      throw std::invalid_argument("select_times: no sample at t = " + std::to_string(times[i]));
    }
    out.times[i] = u.times[k];
    out.states.col(i) = u.states.col(k);
  }
  return out;
}

Eigen::VectorXcd transformed_solution(const Eigen::MatrixXd& a_op,
                                      const SourcePair& s, double alpha,
                                      Complex p) {
  Eigen::MatrixXcd m = a_op.cast<Complex>();
  m.diagonal().array() += std::pow(p, alpha);
  const Eigen::VectorXcd rhs = std::pow(p, alpha - 1.0) * s.a.cast<Complex>() +
                               std::pow(p, alpha - 2.0) * s.b.cast<Complex>();
  return m.partialPivLu().solve(rhs);
}

std::vector<LaplaceResidual> laplace_identity_check(
    const SolutionField& u, const SourcePair& s, const Eigen::MatrixXd& a_op,
    double alpha, const std::vector<Complex>& p_samples, double tol) {
  const int n = u.size();
  s.validate(n);
  require_square(a_op, n);
  const int count = u.sample_count();
  if (count < 3 || u.times[0] != 0.0) {
    throw std::invalid_argument("laplace_identity_check: need samples from t = 0");
  }
  const TimeGrid grid(u.times[count - 1], count - 1);
  for (int k = 0; k < count; ++k) {
    if (std::abs(u.times[k] - grid.node(k)) > 1e-9 * grid.final_time()) {
      throw std::invalid_argument("laplace_identity_check: samples are not uniform");
    }
  }
  const double a_norm = a_op.cwiseAbs().rowwise().sum().maxCoeff();
  std::vector<LaplaceResidual> out;
  for (const Complex& p : p_samples) {
    Eigen::VectorXcd lu(n);
    Eigen::VectorXd tail(n);
    for (int i = 0; i < n; ++i) {
      const LaplaceValue v = laplace_numeric(TimeSeries(grid, u.states.row(i).transpose()), p);
      lu[i] = v.value;
      tail[i] = v.truncation_bound / p.real();
    }
    const Complex pa = std::pow(p, alpha);
    const Eigen::VectorXcd data = std::pow(p, alpha - 1.0) * s.a.cast<Complex>() +
                                  std::pow(p, alpha - 2.0) * s.b.cast<Complex>();
    const Eigen::VectorXcd r = pa * lu - data + a_op.cast<Complex>() * lu;
    const double scale = std::max(data.norm(), 1e-300);
    LaplaceResidual res;
    res.p = p;
    res.relative = r.norm() / scale;
    res.truncation = tail.norm() * (std::abs(pa) + a_norm) / scale;
    res.inconclusive = res.truncation > tol;
    out.push_back(res);
  }
  return out;
}

GrowthFit growth_probe(const SolutionField& u) {
  const int count = u.sample_count();
  if (count < 2 || u.times[count - 1] - u.times[0] < 5.0) {
    throw std::invalid_argument("growth_probe: need a horizon of at least 5");
  }
  Eigen::VectorXd norms(count);
  for (int k = 0; k < count; ++k) norms[k] = u.states.col(k).norm();
  GrowthFit fit;
  if (norms.maxCoeff() == 0.0) {
    fit.degenerate = true;
    return fit;
  }
  // Upper concave hull of (t, log ||u||): the tightest log-concave majorant,
  // which follows peaks of oscillating solutions whether they grow or decay.
  std::vector<int> hull;
  auto cross = [&](int o, int a, int b) {
    return (u.times[a] - u.times[o]) * (std::log(norms[b]) - std::log(norms[o])) -
           (std::log(norms[a]) - std::log(norms[o])) * (u.times[b] - u.times[o]);
  };
  for (int k = 0; k < count; ++k) {
    if (!(norms[k] > 0.0)) continue;
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), k) >= 0.0) {
      hull.pop_back();
    }
    hull.push_back(k);
  }

  // Least squares for log(envelope) = log(c1) + c2 t at hull-interpolated
  // samples.
  double st = 0, sy = 0, stt = 0, sty = 0;
  int m = 0;
  std::size_t seg = 0;
  for (int k = hull.front(); k <= hull.back(); ++k) {
    while (seg + 2 < hull.size() && hull[seg + 1] <= k) ++seg;
    const int k0 = hull[seg], k1 = hull[std::min(seg + 1, hull.size() - 1)];
    const double t = u.times[k];
    double y = std::log(norms[k0]);
    if (k1 != k0) {
      const double f = (t - u.times[k0]) / (u.times[k1] - u.times[k0]);
      y += f * (std::log(norms[k1]) - std::log(norms[k0]));
    }
    st += t, sy += y, stt += t * t, sty += t * y;
    ++m;
  }
  const double denom = m * stt - st * st;
  fit.c2 = denom > 0.0 ? (m * sty - st * sy) / denom : 0.0;
  const double log_c1 = (sy - fit.c2 * st) / m;
  fit.fit_c1 = std::exp(log_c1);
  double ratio = 0.0;
  for (int k = 0; k < count; ++k) {
    ratio = std::max(ratio, norms[k] / (fit.fit_c1 * std::exp(fit.c2 * u.times[k])));
  }
  fit.max_violation = ratio - 1.0;
  fit.c1 = fit.fit_c1 * std::max(1.0, ratio);
  return fit;
}

void write_solution_csv(std::ostream& out, const SolutionField& u) {
  const auto old = out.precision(17);
  out << 't';
  for (int i = 0; i < u.size(); ++i) out << ",u" << i;
  out << '\n';
  for (int k = 0; k < u.sample_count(); ++k) {
    out << u.times[k];
    for (int i = 0; i < u.size(); ++i) out << ',' << u.states(i, k);
    out << '\n';
  }
  out.precision(old);
}

}  // namespace fwave
