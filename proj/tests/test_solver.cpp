#include "fwave/solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "fwave/elliptic.hpp"

namespace fwave {
namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd scalar(double lambda) { return Eigen::MatrixXd::Constant(1, 1, lambda); }

SourcePair scalar_data(double a, double b) {
  return {Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, b)};
}

struct Problem {
  Eigen::MatrixXd a;
  SourcePair s;
  Mesh mesh;
};

Problem advection(int n) {
  const Mesh m = Mesh::interval(0.0, 1.0, n);
  Problem p{assemble(m, CoefficientField::constant(m, 1.0)).matrix(), {}, m};
  p.s.a.resize(n);
  p.s.b.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = m.point(i)[0];
    p.s.a[i] = std::sin(kPi * x);
    p.s.b[i] = x * (1.0 - x);
  }
  return p;
}

TEST(Route, ParseRoundTrip) {
  for (Route r : {Route::timestep, Route::resolvent, Route::spectral}) {
    EXPECT_EQ(parse_route(to_string(r)), r);
  }
  EXPECT_THROW(parse_route("euler"), std::invalid_argument);
}

TEST(SourcePair, Validation) {
  SourcePair s = scalar_data(1.0, 0.0);
  EXPECT_NO_THROW(s.validate(1));
  EXPECT_THROW(s.validate(2), std::invalid_argument);
  s.b[0] = NAN;
  EXPECT_THROW(s.validate(1), std::invalid_argument);
}

TEST(Timestep, ZeroOperatorIsAffine) {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  const SourcePair s{Eigen::Vector2d(1.0, -2.0), Eigen::Vector2d(0.5, 3.0)};
  const SolutionField u = solve_timestep(zero, s, 1.5, TimeGrid(2.0, 40));
  for (int k = 0; k < u.sample_count(); ++k) {
    const Eigen::VectorXd exact = s.a + u.times[k] * s.b;
    EXPECT_LT((u.state(k) - exact).norm(), 1e-12);
  }
}

TEST(Timestep, ScalarConvergesToMittagLeffler) {
  const double alpha = 1.5, lambda = 2.0;
  double prev = 0.0;
  for (int steps : {64, 128, 256, 512}) {
    const SolutionField u =
        solve_timestep(scalar(lambda), scalar_data(1.0, 0.0), alpha, TimeGrid(1.0, steps));
    const double exact = mittag_leffler(alpha, 1.0, -lambda).real();
    const double err = std::abs(u.states(0, steps) - exact);
    if (prev > 0.0) EXPECT_LT(err, 0.3 * prev) << steps;
    prev = err;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Timestep, NearTwoApproachesCosine) {
  const SolutionField u =
      solve_timestep(scalar(4.0), scalar_data(1.0, 0.0), 1.99, TimeGrid(1.0, 1000));
  EXPECT_NEAR(u.states(0, 1000), std::cos(2.0), 0.03);
}

TEST(Timestep, RejectsBadOrder) {
  EXPECT_THROW(solve_timestep(scalar(1.0), scalar_data(1, 0), 1.0, TimeGrid(1, 8)),
               std::invalid_argument);
  EXPECT_THROW(solve_timestep(scalar(1.0), scalar_data(1, 0), 2.0, TimeGrid(1, 8)),
               std::invalid_argument);
}

TEST(Resolvent, ScalarMatchesMittagLeffler) {
  const std::vector<double> times{0.1, 0.5, 1.0, 2.0};
  for (double lambda : {1.0, 10.0, -0.5}) {
    const SolutionField ua = solve_resolvent(scalar(lambda), scalar_data(1, 0), 1.5, times);
    const SolutionField ub = solve_resolvent(scalar(lambda), scalar_data(0, 1), 1.5, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double t = times[k], ta = std::pow(t, 1.5);
      const double ea = mittag_leffler(1.5, 1.0, -lambda * ta).real();
      const double eb = t * mittag_leffler(1.5, 2.0, -lambda * ta).real();
      EXPECT_NEAR(ua.states(0, k), ea, 1e-9 * std::max(1.0, std::abs(ea))) << lambda << " " << t;
      EXPECT_NEAR(ub.states(0, k), eb, 1e-9 * std::max(1.0, std::abs(eb))) << lambda << " " << t;
    }
  }
}

TEST(Resolvent, UnstableModeShiftsContour) {
  // c < 0 makes -lambda positive: the pole p = |lambda|^{1/alpha} > 0 must be
  // enclosed by a shifted contour.
  const SolutionField u = solve_resolvent(scalar(-4.0), scalar_data(1, 0), 1.5, {1.0});
  EXPECT_NEAR(u.states(0, 0), mittag_leffler(1.5, 1.0, 4.0).real(), 1e-8);
}

TEST(Resolvent, DoublingNodesGainsTenfold) {
  const double exact = mittag_leffler(1.5, 1.0, -3.0).real();
  double prev = 0.0;
  for (int nodes : {8, 16, 32}) {
    const double err = std::abs(
        solve_resolvent(scalar(3.0), scalar_data(1, 0), 1.5, {1.0}, {nodes}).states(0, 0) - exact);
    if (prev > 0.0) EXPECT_LT(err, std::max(0.1 * prev, 1e-13)) << nodes;
    prev = err;
  }
}

TEST(Resolvent, TooFewNodesForStiffOperatorIsReported) {
  const Problem p = advection(16);
  EXPECT_THROW(solve_resolvent(p.a, p.s, 1.5, {0.5}, {16}), NumericalError);
}

TEST(Resolvent, RejectsBadInput) {
  EXPECT_THROW(solve_resolvent(scalar(1), scalar_data(1, 0), 1.5, {0.0}), std::invalid_argument);
  EXPECT_THROW(solve_resolvent(scalar(1), scalar_data(1, 0), 1.5, {1.0}, {15}),
               std::invalid_argument);
}

TEST(Routes, AgreeOnAdvectionProblem) {
  const Problem p = advection(16);
  const std::vector<double> times{0.25, 0.5, 1.0};
  const SolutionField ts = select_times(solve_timestep(p.a, p.s, 1.5, TimeGrid(1.0, 1024)), times);
  const SolutionField rs = solve_resolvent(p.a, p.s, 1.5, times);
  const SolutionField sp = solve_spectral_oracle(riesz_data(p.a, eigendecompose(p.a)), p.s, 1.5, times);
  EXPECT_LT(relative_difference(rs, sp), 1e-6);
  EXPECT_LT(relative_difference(ts, sp), 1e-3);
}

TEST(Routes, LinearInData) {
  const Problem p = advection(8);
  const std::vector<double> times{0.3, 0.9};
  SourcePair sa{p.s.a, Eigen::VectorXd::Zero(8)}, sb{Eigen::VectorXd::Zero(8), p.s.b};
  const SolutionField u = solve_resolvent(p.a, p.s, 1.5, times);
  const SolutionField ua = solve_resolvent(p.a, sa, 1.5, times);
  const SolutionField ub = solve_resolvent(p.a, sb, 1.5, times);
  EXPECT_LT((u.states - ua.states - ub.states).norm(), 1e-12 * u.states.norm());
}

TEST(Propagators, MatchVectorSolvers) {
  const Problem p = advection(8);
  const std::vector<double> times{0.25, 1.0};
  const RieszData rd = riesz_data(p.a, eigendecompose(p.a));
  const TimeGrid grid(1.0, 64);
  const auto pr = resolvent_propagators(p.a, 1.5, times);
  const auto ps = spectral_propagators(rd, 1.5, times);
  const auto pt = timestep_propagators(p.a, 1.5, grid, times);
  const SolutionField ur = solve_resolvent(p.a, p.s, 1.5, times);
  const SolutionField us = solve_spectral_oracle(rd, p.s, 1.5, times);
  const SolutionField ut = select_times(solve_timestep(p.a, p.s, 1.5, grid), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    auto apply = [&](const Propagators& q) { return Eigen::VectorXd(q.from_a * p.s.a + q.from_b * p.s.b); };
    EXPECT_LT((apply(pr[k]) - ur.state(k)).norm(), 1e-12);
    EXPECT_LT((apply(ps[k]) - us.state(k)).norm(), 1e-12);
    EXPECT_LT((apply(pt[k]) - ut.state(k)).norm(), 1e-12);
  }
  EXPECT_THROW(timestep_propagators(p.a, 1.5, grid, {0.3}), std::invalid_argument);
}

TEST(Spectral, InitialValueIsData) {
  const Problem p = advection(8);
  const SolutionField u =
      solve_spectral_oracle(riesz_data(p.a, eigendecompose(p.a)), p.s, 1.5, {0.0});
  EXPECT_LT((u.state(0) - p.s.a).norm(), 1e-9);
}

TEST(Spectral, RefusesDefectiveOperator) {
  Eigen::MatrixXd j(2, 2);
  j << 2.0, 1.0, 0.0, 2.0;
  const RieszData rd = riesz_data(j, eigendecompose(j));
  EXPECT_THROW(solve_spectral_oracle(rd, {Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 0)}, 1.5, {1.0}),
               NumericalError);
  // The resolvent route still works on it.
  EXPECT_NO_THROW(solve_resolvent(j, {Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 0)}, 1.5, {1.0}));
}

TEST(Spectral, DefectiveResolventMatchesClosedForm) {
  // J = [[l, 1], [0, l]]: u_1 = E(-l t^a) a_1 + (d/dl) E(-l t^a) a_2.
  Eigen::MatrixXd j(2, 2);
  j << 2.0, 1.0, 0.0, 2.0;
  const double t = 0.8, ta = std::pow(t, 1.5), h = 1e-4;
  const SolutionField u = solve_resolvent(j, {Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0)}, 1.5, {t});
  const double deriv = (mittag_leffler(1.5, 1.0, -(2.0 + h) * ta).real() -
                        mittag_leffler(1.5, 1.0, -(2.0 - h) * ta).real()) / (2 * h);
  EXPECT_NEAR(u.states(0, 0), deriv, 1e-7);
  EXPECT_NEAR(u.states(1, 0), mittag_leffler(1.5, 1.0, -2.0 * ta).real(), 1e-10);
}

TEST(Laplace, ResolventSolutionSatisfiesIdentity) {
  const Problem p = advection(16);
  const TimeGrid grid(20.0, 4000);
  const SolutionField u = solve_timestep(p.a, p.s, 1.5, grid);
  const auto res = laplace_identity_check(u, p.s, p.a, 1.5, {2.0, 3.0, 4.0}, 1e-2);
  for (const auto& r : res) {
    EXPECT_FALSE(r.inconclusive);
    EXPECT_LT(r.relative, 1e-2) << r.p;
  }
}

TEST(Laplace, DetectsWrongData) {
  const Problem p = advection(8);
  const SolutionField u = solve_timestep(p.a, p.s, 1.5, TimeGrid(20.0, 2000));
  SourcePair wrong = p.s;
  wrong.a *= 2.0;
  EXPECT_GT(laplace_identity_check(u, wrong, p.a, 1.5, {3.0}, 1e-2)[0].relative, 0.1);
}

TEST(Laplace, ShortHorizonIsInconclusive) {
  const SolutionField u = solve_timestep(scalar(0.0), scalar_data(1, 0), 1.5, TimeGrid(1.0, 100));
  EXPECT_TRUE(laplace_identity_check(u, scalar_data(1, 0), scalar(0.0), 1.5, {1.0}, 1e-2)[0].inconclusive);
}

TEST(Laplace, TransformedSolutionScalar) {
  const Complex p(2.0, 1.0);
  const Eigen::VectorXcd v = transformed_solution(scalar(3.0), scalar_data(1.0, 2.0), 1.5, p);
  const Complex expect = (std::pow(p, 0.5) + 2.0 * std::pow(p, -0.5)) / (std::pow(p, 1.5) + 3.0);
  EXPECT_NEAR(std::abs(v[0] - expect), 0.0, 1e-14);
}

TEST(Growth, ZeroSolutionIsDegenerate) {
  const SolutionField u = solve_timestep(scalar(1.0), scalar_data(0, 0), 1.5, TimeGrid(5.0, 50));
  EXPECT_TRUE(growth_probe(u).degenerate);
}

TEST(Growth, DissipativeBoundHolds) {
  const Problem p = advection(16);
  const SolutionField u = solve_timestep(p.a, p.s, 1.5, TimeGrid(5.0, 1000));
  const GrowthFit g = growth_probe(u);
  EXPECT_LT(g.c2, 0.1);
  for (int k = 0; k < u.sample_count(); ++k) {
    EXPECT_LE(u.state(k).norm(), g.c1 * std::exp(g.c2 * u.times[k]) * (1 + 1e-12));
  }
}

TEST(Growth, UnstableScalarHasPositiveRate) {
  const SolutionField u = solve_timestep(scalar(-1.0), scalar_data(1, 0), 1.5, TimeGrid(6.0, 600));
  EXPECT_GT(growth_probe(u).c2, 0.5);
  const SolutionField short_u = solve_timestep(scalar(1.0), scalar_data(1, 0), 1.5, TimeGrid(4.0, 40));
  EXPECT_THROW(growth_probe(short_u), std::invalid_argument);
}

TEST(Csv, SolutionHeaderAndRows) {
  const SolutionField u = solve_timestep(scalar(1.0), scalar_data(1, 0), 1.5, TimeGrid(1.0, 4));
  std::ostringstream os;
  write_solution_csv(os, u);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,u0");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

}  // namespace
}  // namespace fwave
