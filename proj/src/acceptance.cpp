#include "fwave/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fwave/extended.hpp"
#include "fwave/spectral.hpp"
#include "fwave/uniqueness.hpp"

namespace fwave {

namespace {

constexpr double kAlpha = 1.5;

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << std::scientific << v;
  return s.str();
}

Eigen::MatrixXd jordan(double lambda, int size) {
  Eigen::MatrixXd j = lambda * Eigen::MatrixXd::Identity(size, size);
  for (int i = 0; i + 1 < size; ++i) j(i, i + 1) = 1.0;
  return j;
}

std::vector<double> observation_times() {
  std::vector<double> t;
  for (int k = 1; k <= 64; ++k) t.push_back(k / 64.0);
  return t;
}

ObservationSetup observation_setup(const ReferenceProblem& p) {
  ObservationSetup s;
  s.omega = subdomain_indices(p.op.mesh(), Box::interval(0.0, 0.25));
  s.times = observation_times();
  s.route = Route::spectral;
  return s;
}

// --- 1: Caputo derivative inverts the Riemann-Liouville integral --------
CriterionResult inverse_pair(const AcceptanceOptions&) {
  CriterionResult r{1, "Caputo o RL-integral = Id for t^3, alpha 1.5", false, 0.0, {}};
  auto error_at = [](int steps) {
    const TimeGrid grid(1.0, steps);
    const TimeSeries v = sample(grid, [](double t) { return t * t * t; });
    const TimeSeries back = caputo_derivative(rl_integral(v, kAlpha), kAlpha);
    return (back.values() - v.values()).cwiseAbs().maxCoeff();
  };
  const double e512 = error_at(512), e1024 = error_at(1024);
  r.pass = e512 <= 0.02 && e1024 <= 0.6 * e512;
  r.detail = "err(512) = " + fmt(e512) + " (<= 2e-2), err(1024)/err(512) = " +
             fmt(e1024 / e512) + " (<= 0.6)";
  return r;
}

// --- 2: Mittag-Leffler identities --------------------------------------
CriterionResult mittag_leffler_identities(const AcceptanceOptions& opts) {
  CriterionResult r{2, "Mittag-Leffler: E_{1,1}(1) = e, E_{2,1}(-t^2) = cos t", false, 0.0, {}};
  const double e_err = std::abs(opts.mittag_leffler(1.0, 1.0, 1.0) - std::numbers::e);
  double cos_err = 0.0;
  for (int k = 1; k <= 30; ++k) {
    const double t = 0.1 * k;
    cos_err = std::max(cos_err, std::abs(opts.mittag_leffler(2.0, 1.0, -t * t) - std::cos(t)));
  }
  r.pass = e_err <= 1e-12 && cos_err <= 1e-10;
  r.detail = "|E11(1) - e| = " + fmt(e_err) + " (<= 1e-12), max |E21(-t^2) - cos t| = " +
             fmt(cos_err) + " (<= 1e-10)";
  return r;
}

// --- 3: three solution routes agree ------------------------------------
CriterionResult cross_route(const AcceptanceOptions&) {
  CriterionResult r{3, "cross-route agreement, N = 32", false, 0.0, {}};
  const ReferenceProblem p = reference_problem();
  const Eigen::MatrixXd& a = p.op.matrix();
  const std::vector<double> times{0.25, 0.5, 1.0};
  const SolutionField ts =
      select_times(solve_timestep(a, p.data, kAlpha, TimeGrid(1.0, 1024)), times);
  LaplaceContour contour;
  contour.nodes = 48;
  const SolutionField rs = solve_resolvent(a, p.data, kAlpha, times, contour);
  const SolutionField ss =
      solve_spectral_oracle(riesz_data(a, eigendecompose(a)), p.data, kAlpha, times);
  const double ts_rs = relative_difference(ts, rs);
  const double ts_ss = relative_difference(ts, ss);
  const double rs_ss = relative_difference(rs, ss);
  r.pass = ts_rs <= 1e-3 && ts_ss <= 1e-3 && rs_ss <= 1e-6;
  r.detail = "timestep-resolvent " + fmt(ts_rs) + ", timestep-spectral " + fmt(ts_ss) +
             " (<= 1e-3), resolvent-spectral " + fmt(rs_ss) + " (<= 1e-6)";
  return r;
}

// --- 4: projector identities -------------------------------------------
CriterionResult spectral_identities(const AcceptanceOptions&) {
  CriterionResult r{4, "Riesz projector identities and Jordan-chain check", false, 0.0, {}};
  double worst = 0.0, completeness = 0.0;
  auto check = [&](const Eigen::MatrixXd& a, std::optional<double> cluster_tol) {
    const RieszData data = riesz_data(a, eigendecompose(a, cluster_tol));
    for (const IdentityReport& rep : verify_identities(a, data, 1e-8)) {
      worst = std::max(worst, rep.worst());
    }
    completeness = std::max(completeness, completeness_defect(data));
    return data;
  };
  check(reference_problem().op.matrix(), std::nullopt);
  const Eigen::MatrixXd j2 = jordan(5.0, 2);
  const RieszData d2 = check(j2, std::nullopt);
  // The triple eigenvalue of a 3x3 block splits by ~eps^(1/3) in the
  // eigensolver; merge it explicitly.
  const RieszData d3 = check(jordan(2.0, 3), 1e-3);
  const Lemma3Result l3 = lemma3_check(j2, d2.clusters.at(0), Eigen::Vector2cd(0.0, 1.0), 1e-8);
  const bool ranks_ok = d2.clusters.at(0).rank == 2 && d3.clusters.at(0).rank == 3;
  r.pass = worst <= 1e-8 && completeness <= 1e-8 && l3.residual <= 1e-8 && ranks_ok;
  r.detail = "max identity residual " + fmt(worst) + ", ||sum P - I|| " + fmt(completeness) +
             ", chain residual " + fmt(l3.residual) + " (k0 = " + std::to_string(l3.k0) +
             ") (all <= 1e-8), Jordan ranks " + std::to_string(d2.clusters.at(0).rank) + "/" +
             std::to_string(d3.clusters.at(0).rank);
  return r;
}

// --- 5: Laplace-domain identity ----------------------------------------
CriterionResult laplace_identity(const AcceptanceOptions&) {
  CriterionResult r{5, "Laplace identity on T = 20, p = 2, 3, 4", false, 0.0, {}};
  const ReferenceProblem p = reference_problem();
  const Eigen::MatrixXd& a = p.op.matrix();
  const SolutionField u = solve_timestep(a, p.data, kAlpha, TimeGrid(20.0, 4000));
  const auto rows = laplace_identity_check(u, p.data, a, kAlpha, {2.0, 3.0, 4.0}, 1e-2);
  double worst = 0.0;
  bool inconclusive = false;
  for (const LaplaceResidual& row : rows) {
    worst = std::max(worst, row.relative);
    inconclusive = inconclusive || row.inconclusive;
  }
  r.pass = worst <= 1e-2 && !inconclusive;
  r.detail = "max relative residual " + fmt(worst) + " (<= 1e-2), timestep K = 4000";
  if (inconclusive) r.detail += ", truncation inconclusive";
  return r;
}

// --- 6: observation map is injective ------------------------------------
CriterionResult observability(const AcceptanceOptions&) {
  CriterionResult r{6, "observation map on omega = (0, 0.25), 64 times", false, 0.0, {}};
  const ReferenceProblem p = reference_problem();
  const Eigen::MatrixXd& a = p.op.matrix();
  const ObservationSetup setup = observation_setup(p);
  const InjectivityReport plain = injectivity_report(build_observation_map(a, kAlpha, setup));
  // sigma_min / sigma_max is ~1e-20, below double rounding, so the rank is
  // decided in binary128.
  const ExtendedInjectivity quad = extended_injectivity(a, kAlpha, setup);
  const InjectivityReport& q = quad.report;
  const bool consistent = std::abs(q.sigma_max - plain.sigma_max) <= 1e-10 * plain.sigma_max;
  r.pass = q.rank == 64 && q.verdict == "injective" && consistent;
  r.detail = "|omega| = " + std::to_string(setup.omega.size()) + ", binary128 rank " +
             std::to_string(q.rank) + "/64 (" + q.verdict + "), sigma_min/sigma_max = " +
             fmt(q.ratio) + ", sigma_max = " + fmt(q.sigma_max) + "; binary64 rank " +
             std::to_string(plain.rank) + " (tol " + fmt(plain.rank_tol) + ")";
  return r;
}

// --- 7: noisy inverse-source recovery -----------------------------------
CriterionResult recovery(const AcceptanceOptions& opts) {
  CriterionResult r{7, "Tikhonov recovery, 1e-3 noise, default lambda", false, 0.0, {}};
  const ReferenceProblem p = reference_problem();
  const ObservationMap m = build_observation_map(p.op.matrix(), kAlpha, observation_setup(p));
  Eigen::VectorXd truth(2 * p.data.size());
  truth << p.data.a, p.data.b;
  const Eigen::VectorXd data = add_relative_noise(m.matrix * truth, 1e-3, opts.seed);
  auto error_for = [&](const Regularization& reg, double* lambda) {
    const Recovery rec = invert_source(m, data, reg);
    Eigen::VectorXd x(truth.size());
    x << rec.a, rec.b;
    if (lambda) *lambda = rec.lambda;
    return (x - truth).norm() / truth.norm();
  };
  double lambda = 0.0;
  const double err = error_for({}, &lambda);
  r.pass = err <= 0.05;
  r.detail = "relative error " + fmt(err) + " (<= 5e-2), lambda = 1e-8 sigma_1^2 = " +
             fmt(lambda) + ", seed " + std::to_string(opts.seed);
  if (!r.pass) {
    // Reference points for the analysis, not part of the verdict.
    const double s1 = m.singular_values[0];
    Regularization stronger;
    stronger.lambda = 1e-6 * s1 * s1;
    r.detail += "; for reference lambda = 1e-6 sigma_1^2 gives " + fmt(error_for(stronger, nullptr));
  }
  return r;
}

// --- 8: branch identity --------------------------------------------------
CriterionResult branch_probe(const AcceptanceOptions&) {
  CriterionResult r{8, "branch identity, scalar A = [1]", false, 0.0, {}};
  const Eigen::MatrixXd a = Eigen::MatrixXd::Ones(1, 1);
  const ProbeVector psi{Eigen::VectorXd::Ones(1)};
  std::vector<Complex> etas;
  for (double eta : chebyshev_points(-10.0, -0.5, 18)) etas.emplace_back(eta);
  etas.insert(etas.begin(), -10.0);
  etas.emplace_back(-0.5);
  double lowest = 1e300, zero_case = 0.0;
  for (const BranchRow& row :
       branch_identity_probe(a, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), psi, kAlpha, etas)) {
    lowest = std::min(lowest, row.residual);
  }
  for (const BranchRow& row : branch_identity_probe(a, Eigen::VectorXd::Zero(1),
                                                    Eigen::VectorXd::Zero(1), psi, kAlpha, etas)) {
    zero_case = std::max(zero_case, row.residual);
  }
  r.pass = etas.size() == 20 && lowest >= 0.1 && zero_case == 0.0;
  r.detail = std::to_string(etas.size()) + " samples in [-10, -0.5]: min residual " +
             fmt(lowest) + " (>= 0.1), a = b = 0 max residual " + fmt(zero_case) + " (== 0)";
  return r;
}

// --- 9: exponential growth bound ----------------------------------------
CriterionResult growth(const AcceptanceOptions&) {
  CriterionResult r{9, "growth envelope on T = 5", false, 0.0, {}};
  const ReferenceProblem p = reference_problem();
  const SolutionField u = solve_timestep(p.op.matrix(), p.data, kAlpha, TimeGrid(5.0, 2560));
  const GrowthFit fit = growth_probe(u);
  double excess = 0.0;
  for (int k = 0; k < u.sample_count(); ++k) {
    const double bound = fit.c1 * std::exp(fit.c2 * u.times[k]);
    excess = std::max(excess, u.states.col(k).norm() / bound - 1.0);
  }
  r.pass = !fit.degenerate && excess <= 1e-12 && fit.c2 <= 0.1;
  r.detail = "C1 = " + fmt(fit.c1) + ", C2 = " + fmt(fit.c2) + " (<= 0.1), max excess over envelope " +
             fmt(std::max(excess, 0.0)) + " at " + std::to_string(u.sample_count()) + " samples";
  return r;
}

struct Entry {
  CriterionResult (*run)(const AcceptanceOptions&);
  double time_limit;  // seconds, 0 = none
};

const Entry kEntries[] = {
    {inverse_pair, 5.0},   {mittag_leffler_identities, 0.0}, {cross_route, 60.0},
    {spectral_identities, 0.0}, {laplace_identity, 0.0}, {observability, 120.0},
    {recovery, 0.0},       {branch_probe, 0.0},              {growth, 0.0},
};

}  // namespace

ReferenceProblem reference_problem(int n) {
  const Mesh mesh = Mesh::interval(0.0, 1.0, n);
  DiscreteOperator op = assemble(mesh, CoefficientField::constant(mesh, 1.0));
  SourcePair data{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const double x = mesh.point(i)[0];
    data.a[i] = std::sin(std::numbers::pi * x);
    data.b[i] = x * (1.0 - x);
  }
  return {std::move(op), std::move(data)};
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
  if (id < 1 || id > 9) throw std::invalid_argument("no acceptance criterion " + std::to_string(id));
  const Entry& e = kEntries[id - 1];
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = e.run(opts);
  } catch (const std::exception& ex) {
    r.id = id;
    r.title = "criterion " + std::to_string(id);
    r.pass = false;
    r.detail = std::string("error: ") + ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (e.time_limit > 0.0) {
    r.detail += "; " + fmt(r.seconds) + " s (< " + fmt(e.time_limit) + " s)";
    if (r.seconds >= e.time_limit) r.pass = false;
  }
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 9; ++id) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) {
      continue;
    }
    out.push_back(run_criterion(id, opts));
  }
  return out;
}

void print_results(std::ostream& out, const std::vector<CriterionResult>& results) {
  int passed = 0;
  for (const CriterionResult& r : results) {
    passed += r.pass;
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << "  " << r.title << "  (" << std::fixed
        << std::setprecision(2) << r.seconds << " s)  " << r.detail << '\n';
    out.unsetf(std::ios::floatfield);
  }
  out << passed << '/' << results.size() << " criteria passed\n";
}

}  // namespace fwave
