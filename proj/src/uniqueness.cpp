#include "fwave/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "json.hpp"

namespace fwave {

namespace {

void require_nodes(const std::vector<int>& omega, int n) {
  if (omega.empty()) throw std::invalid_argument("observation set omega is empty");
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] < 0 || omega[i] >= n) {
      throw std::invalid_argument("omega index " + std::to_string(omega[i]) +
                                  " outside 0.." + std::to_string(n - 1));
    }
    if (i > 0 && omega[i] <= omega[i - 1]) {
      throw std::invalid_argument("omega indices must be strictly increasing");
    }
  }
}

// Spectrum distance guard shared by the resolvent-based probes.
void require_resolvent_set(const Eigen::VectorXcd& eigenvalues, double a_norm,
                           Complex z, const char* who) {
  const double dist = (eigenvalues.array() - z).abs().minCoeff();
  if (dist <= 1e-8 * std::max(1.0, a_norm)) {
    throw NumericalError(std::string(who) + ": sample (" + std::to_string(z.real()) +
                         ", " + std::to_string(z.imag()) + ") is within " +
                         std::to_string(dist) + " of the spectrum");
  }
}

Eigen::VectorXcd eigenvalues_of(const Eigen::MatrixXd& a_op) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a_op, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return es.eigenvalues();
}

double operator_norm(const Eigen::MatrixXd& a_op) {
  return a_op.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

void ObservationSetup::validate(int n) const {
  require_nodes(omega, n);
  if (times.empty()) throw std::invalid_argument("observation times are empty");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0) || !std::isfinite(times[k])) {
      throw std::invalid_argument("observation times must be positive");
    }
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw std::invalid_argument("observation times must be strictly increasing");
    }
  }
  if (route == Route::timestep && timestep_steps < 2) {
    throw std::invalid_argument("timestep route needs at least 2 steps");
  }
}

ObservationMap build_observation_map(const Eigen::MatrixXd& a_op, double alpha,
                                     const ObservationSetup& setup,
                                     const RieszData* riesz) {
  const int n = static_cast<int>(a_op.rows());
  if (a_op.cols() != n) throw std::invalid_argument("operator must be square");
  setup.validate(n);

  std::vector<Propagators> props;
  switch (setup.route) {
    case Route::spectral: {
      if (riesz) {
        props = spectral_propagators(*riesz, alpha, setup.times);
      } else {
        props = spectral_propagators(riesz_data(a_op, eigendecompose(a_op)), alpha,
                                     setup.times);
      }
      break;
    }
    case Route::resolvent:
      props = resolvent_propagators(a_op, alpha, setup.times, setup.contour);
      break;
    case Route::timestep:
      props = timestep_propagators(a_op, alpha,
                                   TimeGrid(setup.times.back(), setup.timestep_steps),
                                   setup.times);
      break;
  }

  ObservationMap m;
  m.setup = setup;
  const int nodes = static_cast<int>(setup.omega.size());
  m.matrix.resize(setup.rows(), 2 * n);
  for (std::size_t k = 0; k < setup.times.size(); ++k) {
    for (int i = 0; i < nodes; ++i) {
      const int row = static_cast<int>(k) * nodes + i;
      m.matrix.row(row).head(n) = props[k].from_a.row(setup.omega[i]);
      m.matrix.row(row).tail(n) = props[k].from_b.row(setup.omega[i]);
    }
  }
  if (!m.matrix.allFinite()) {
    throw NumericalError("build_observation_map: non-finite entries from the " +
                         to_string(setup.route) + " route");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  m.singular_values = svd.singularValues();
  m.left = svd.matrixU();
  m.right = svd.matrixV();
  return m;
}

Eigen::VectorXd observe(const SolutionField& u, const ObservationSetup& setup) {
  setup.validate(u.size());
  const SolutionField at = select_times(u, setup.times);
  const int nodes = static_cast<int>(setup.omega.size());
  Eigen::VectorXd out(setup.rows());
  for (int k = 0; k < at.sample_count(); ++k) {
    for (int i = 0; i < nodes; ++i) out[k * nodes + i] = at.states(setup.omega[i], k);
  }
  return out;
}

InjectivityReport injectivity_report(const ObservationMap& m,
                                     std::optional<double> rel_tol) {
  InjectivityReport r;
  r.unknowns = m.unknowns();
  const Eigen::VectorXd& s = m.singular_values;
  const double eps = std::numeric_limits<double>::epsilon();
  const double rel =
      rel_tol.value_or(std::max(m.matrix.rows(), m.matrix.cols()) * eps);
  r.sigma_max = s.size() ? s[0] : 0.0;
  // Fewer rows than unknowns: the missing singular values are exact zeros.
  r.sigma_min = s.size() < r.unknowns || s.size() == 0 ? 0.0 : s[s.size() - 1];
  r.ratio = r.sigma_max > 0.0 ? r.sigma_min / r.sigma_max : 0.0;
  r.condition = r.sigma_min > 0.0 ? r.sigma_max / r.sigma_min
                                  : std::numeric_limits<double>::infinity();
  r.rank_tol = rel * r.sigma_max;
  for (int i = 0; i < s.size(); ++i) r.rank += s[i] > r.rank_tol;
  r.injective = r.rank == r.unknowns && r.sigma_max > 0.0;
  r.verdict = r.injective ? "injective" : "not injective";
  return r;
}

std::vector<double> chebyshev_points(double lo, double hi, int count) {
  if (count < 1 || !(hi >= lo)) throw std::invalid_argument("chebyshev_points: bad range");
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j) {
    const double c = std::cos((2.0 * j + 1.0) * std::numbers::pi / (2.0 * count));
    out[count - 1 - j] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * c;
  }
  return out;
}

std::vector<Complex> default_resolvent_samples(const Eigen::MatrixXd& a_op,
                                               int count) {
  const Eigen::VectorXcd ev = eigenvalues_of(a_op);
  const double lo = ev.real().minCoeff(), hi = ev.real().maxCoeff();
  const double width = std::max(1.0, hi - lo);
  std::vector<Complex> out;
  for (double x : chebyshev_points(lo - 1.0 - width, lo - 1.0, count)) out.emplace_back(x);
  return out;
}

ResolventVanishing resolvent_vanishing_check(const Eigen::MatrixXd& a_op,
                                             const std::vector<int>& omega,
                                             const std::vector<Complex>& z_samples) {
  const int n = static_cast<int>(a_op.rows());
  require_nodes(omega, n);
  if (z_samples.empty()) {
    throw std::invalid_argument("resolvent_vanishing_check: no z samples");
  }
  const Eigen::VectorXcd ev = eigenvalues_of(a_op);
  const double a_norm = operator_norm(a_op);
  const int nodes = static_cast<int>(omega.size());
  Eigen::MatrixXd stacked(2 * nodes * z_samples.size(), n);
  ResolventVanishing out;
  out.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < z_samples.size(); ++k) {
    const Complex z = z_samples[k];
    require_resolvent_set(ev, a_norm, z, "resolvent_vanishing_check");
    out.min_distance = std::min(out.min_distance, (ev.array() - z).abs().minCoeff());
    Eigen::MatrixXcd shifted = a_op.cast<Complex>();
    shifted.diagonal().array() -= z;
    const Eigen::MatrixXcd inv = shifted.partialPivLu().inverse();
    for (int i = 0; i < nodes; ++i) {
      stacked.row(2 * (k * nodes + i)) = inv.row(omega[i]).real();
      stacked.row(2 * (k * nodes + i) + 1) = inv.row(omega[i]).imag();
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  out.sigma_max = s[0];
  out.sigma_min = s.size() < n ? 0.0 : s[n - 1];
  out.kernel_candidate = svd.matrixV().col(n - 1);
  return out;
}

CascadeReport projection_cascade_check(const Eigen::MatrixXd& a_op,
                                       const RieszData& riesz,
                                       const Eigen::VectorXd& a,
                                       const std::vector<int>& omega, double tol) {
  const int n = static_cast<int>(a_op.rows());
  require_nodes(omega, n);
  if (a.size() != n) throw std::invalid_argument("projection_cascade_check: size mismatch");
  CascadeReport report;
  report.tested = true;
  report.a = a;
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
  const double bound = tol * scale;
  const Eigen::VectorXcd ac = a.cast<Complex>();
  auto restricted_norm = [&](const Eigen::VectorXcd& v) {
    double s = 0.0;
    for (int i : omega) s += std::norm(v[i]);
    return std::sqrt(s);
  };
  for (const RieszProjector& c : riesz.clusters) {
    ClusterCascade cc;
    cc.center = c.center;
    cc.rank = c.rank;
    Eigen::MatrixXcd shifted = a_op.cast<Complex>();
    shifted.diagonal().array() -= c.center;
    Eigen::VectorXcd x = c.projector * ac;
    const int depth = std::max(c.rank, 1);
    for (int l = 0; l < depth; ++l) {
      const Eigen::VectorXcd next = c.nilpotent * x;
      cc.omega_norms.push_back(restricted_norm(x));
      cc.full_norms.push_back(x.norm());
      cc.descent.push_back((shifted * x - next).norm());
      x = next;
    }
    cc.vanishes_on_omega = std::all_of(cc.omega_norms.begin(), cc.omega_norms.end(),
                                       [&](double v) { return v <= bound; });
    cc.uc_violation = cc.vanishes_on_omega && cc.full_norms.front() > bound;
    report.uc_violation = report.uc_violation || cc.uc_violation;
    report.clusters.push_back(std::move(cc));
  }
  if (a.norm() == 0.0) {
    report.note = "a = 0: every projection vanishes";
  } else if (report.uc_violation) {
    report.note = "discrete unique continuation violated: P_n a vanishes on omega but not in the domain";
  }
  return report;
}

CascadeReport projection_cascade_from_kernel(const Eigen::MatrixXd& a_op,
                                             const RieszData& riesz,
                                             const std::vector<int>& omega,
                                             const std::vector<Complex>& z_samples,
                                             double tol) {
  const ResolventVanishing rv = resolvent_vanishing_check(a_op, omega, z_samples);
  if (rv.sigma_min > tol * rv.sigma_max) {
    CascadeReport report;
    report.note = "no kernel vector exists (sigma_min / sigma_max = " +
                  std::to_string(rv.sigma_min / rv.sigma_max) + ")";
    return report;
  }
  return projection_cascade_check(a_op, riesz, rv.kernel_candidate, omega, tol);
}

ProbeVector ProbeVector::on(const std::vector<int>& omega, int n,
                            const Eigen::VectorXd& values) {
  require_nodes(omega, n);
  if (values.size() != static_cast<Eigen::Index>(omega.size())) {
    throw std::invalid_argument("ProbeVector: one value per omega node expected");
  }
  const double norm = values.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("ProbeVector: zero probe");
  ProbeVector p{Eigen::VectorXd::Zero(n)};
  for (std::size_t i = 0; i < omega.size(); ++i) p.psi[omega[i]] = values[i] / norm;
  return p;
}

std::vector<ProbeVector> default_probes(const std::vector<int>& omega, int n,
                                        std::uint64_t seed) {
  std::vector<ProbeVector> out;
  const int m = static_cast<int>(omega.size());
  for (int i = 0; i < m; ++i) {
    out.push_back(ProbeVector::on(omega, n, Eigen::VectorXd::Unit(m, i)));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v[i] = normal(rng);
  out.push_back(ProbeVector::on(omega, n, v));
  return out;
}

std::vector<BranchRow> branch_identity_probe(const Eigen::MatrixXd& a_op,
                                             const Eigen::VectorXd& a,
                                             const Eigen::VectorXd& b,
                                             const ProbeVector& psi, double alpha,
                                             const std::vector<Complex>& etas) {
  const int n = static_cast<int>(a_op.rows());
  if (a.size() != n || b.size() != n || psi.psi.size() != n) {
    throw std::invalid_argument("branch_identity_probe: size mismatch");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("branch_identity_probe: alpha > 0");
  const Eigen::VectorXcd ev = eigenvalues_of(a_op);
  const double a_norm = operator_norm(a_op);
  Eigen::MatrixXcd rhs(n, 2);
  rhs.col(0) = a.cast<Complex>();
  rhs.col(1) = b.cast<Complex>();
  std::vector<BranchRow> out;
  for (const Complex& eta : etas) {
    require_resolvent_set(ev, a_norm, eta, "branch_identity_probe");
    Eigen::MatrixXcd shifted = a_op.cast<Complex>();
    shifted.diagonal().array() -= eta;
    const Eigen::MatrixXcd x = shifted.partialPivLu().solve(rhs);
    BranchRow row;
    row.eta = eta;
    row.f = psi.psi.cast<Complex>().dot(x.col(0));
    row.g = psi.psi.cast<Complex>().dot(x.col(1));
    row.residual = std::abs(std::pow(-eta, 1.0 / alpha) * row.f + row.g);
    out.push_back(row);
  }
  return out;
}

Recovery invert_source(const ObservationMap& m, const Eigen::VectorXd& data,
                       const Regularization& reg) {
  if (data.size() != m.matrix.rows()) {
    throw std::invalid_argument("invert_source: data has " + std::to_string(data.size()) +
                                " samples, the map expects " +
                                std::to_string(m.matrix.rows()));
  }
  const Eigen::VectorXd& s = m.singular_values;
  if (s.size() == 0 || !(s[0] > 0.0)) {
    throw std::invalid_argument("invert_source: observation map is zero");
  }
  const Eigen::VectorXd coeff = m.left.transpose() * data;
  Eigen::VectorXd filtered = Eigen::VectorXd::Zero(s.size());
  Recovery rec;
  if (reg.kind == Regularization::Kind::tikhonov) {
    rec.lambda = reg.lambda.value_or(1e-8 * s[0] * s[0]);
    if (!(rec.lambda >= 0.0)) throw std::invalid_argument("invert_source: lambda < 0");
    double gain = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      const double f = s[i] / (s[i] * s[i] + rec.lambda);
      if (!std::isfinite(f)) continue;  // s_i = 0 with lambda = 0
      filtered[i] = f * coeff[i];
      gain = std::max(gain, f);
      rec.kept += s[i] > 0.0;
    }
    rec.effective_condition = s[0] * gain;
  } else {
    if (reg.truncation < 1 || reg.truncation > s.size()) {
      throw std::invalid_argument("invert_source: truncation must be in 1.." +
                                  std::to_string(s.size()));
    }
    rec.kept = reg.truncation;
    for (int i = 0; i < rec.kept && s[i] > 0.0; ++i) filtered[i] = coeff[i] / s[i];
    rec.effective_condition = s[0] / s[rec.kept - 1];
  }
  const Eigen::VectorXd x = m.right * filtered;
  const int n = m.unknowns() / 2;
  rec.a = x.head(n);
  rec.b = x.tail(n);
  rec.residual = (m.matrix * x - data).norm();
  const double dn = data.norm();
  rec.relative_residual = dn > 0.0 ? rec.residual / dn : 0.0;
  return rec;
}

Eigen::VectorXd add_relative_noise(const Eigen::VectorXd& data, double level,
                                   std::uint64_t seed) {
  if (!(level >= 0.0)) throw std::invalid_argument("noise level must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double scale = level * (data.size() ? data.cwiseAbs().maxCoeff() : 0.0);
  Eigen::VectorXd out = data;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += scale * normal(rng);
  return out;
}

void write_singular_values_csv(std::ostream& out, const ObservationMap& m) {
  const auto old = out.precision(17);
  out << "index,sigma,sigma_over_sigma_max\n";
  const Eigen::VectorXd& s = m.singular_values;
  for (int i = 0; i < s.size(); ++i) {
    out << i << ',' << s[i] << ',' << (s[0] > 0.0 ? s[i] / s[0] : 0.0) << '\n';
  }
  out.precision(old);
}

void write_injectivity_json(std::ostream& out, const InjectivityReport& r) {
  nlohmann::json j = {
      {"sigma_max", r.sigma_max},
      {"sigma_min", r.sigma_min},
      {"sigma_min_over_sigma_max", r.ratio},
      {"condition", std::isfinite(r.condition) ? nlohmann::json(r.condition)
                                               : nlohmann::json("inf")},
      {"rank_tolerance", r.rank_tol},
      {"numerical_rank", r.rank},
      {"unknowns", r.unknowns},
      {"verdict", r.verdict},
  };
  out << j.dump(2) << '\n';
}

void write_recovery_csv(std::ostream& out, const SourcePair& truth,
                        const Recovery& rec) {
  const int n = static_cast<int>(rec.a.size());
  truth.validate(n);
  const auto old = out.precision(17);
  out << "node,a_true,b_true,a_hat,b_hat\n";
  for (int i = 0; i < n; ++i) {
    out << i << ',' << truth.a[i] << ',' << truth.b[i] << ',' << rec.a[i] << ','
        << rec.b[i] << '\n';
  }
  out.precision(old);
}

}  // namespace fwave
