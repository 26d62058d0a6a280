#include "fwave/fraccalc.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

namespace fwave {
namespace {

// Trapezoid rule on [lo, hi] with n panels; test-only oracle.
template <typename F>
double trapezoid(F&& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double acc = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < n; ++i) acc += f(lo + i * h);
  return acc * h;
}

// (J^order v)(t) by substituting s = t - u^(1/order), which removes the kernel
// singularity: J^order v(t) = 1/Gamma(order+1) int_0^{t^order} v(t - r^(1/order)) dr.
template <typename F>
double rl_reference(F&& v, double order, double t) {
  const double upper = std::pow(t, order);
  auto integrand = [&](double r) { return v(t - std::pow(r, 1.0 / order)); };
  return trapezoid(integrand, 0.0, upper, 200000) / std::tgamma(order + 1.0);
}

TEST(TimeGrid, NodesAreUniform) {
  const TimeGrid grid(2.0, 8);
  EXPECT_EQ(grid.node_count(), 9);
  EXPECT_DOUBLE_EQ(grid.node(0), 0.0);
  EXPECT_DOUBLE_EQ(grid.node(8), 2.0);
  EXPECT_DOUBLE_EQ(grid.node(3), 0.75);
  EXPECT_THROW(TimeGrid(0.0, 8), std::invalid_argument);
  EXPECT_THROW(TimeGrid(1.0, 1), std::invalid_argument);
}

TEST(TimeSeries, LengthMustMatchGrid) {
  const TimeGrid grid(1.0, 4);
  EXPECT_THROW(TimeSeries(grid, Eigen::VectorXd::Zero(3)),
               std::invalid_argument);
}

TEST(TimeSeries, CsvLayout) {
  const TimeGrid grid(1.0, 2);
  std::ostringstream real_out, complex_out;
  write_csv(real_out, sample(grid, [](double t) { return 2 * t; }));
  EXPECT_EQ(real_out.str(), "t,value\n0,0\n0.5,1\n1,2\n");
  ComplexTimeSeries c(grid, Eigen::VectorXcd::Constant(3, Complex(1, -1)));
  write_csv(complex_out, c);
  EXPECT_EQ(complex_out.str(), "t,value_re,value_im\n0,1,-1\n0.5,1,-1\n1,1,-1\n");
}

TEST(RlIntegral, OrderOneIsPlainIntegration) {
  const TimeGrid grid(3.0, 30);
  const TimeSeries out = rl_integral(sample(grid, [](double) { return 1.0; }), 1.0);
  for (int k = 0; k <= 30; ++k) EXPECT_NEAR(out[k], grid.node(k), 1e-13);
}

TEST(RlIntegral, HalfOrderOfLinearMatchesQuadrature) {
  const TimeGrid grid(1.0, 16);
  const TimeSeries out = rl_integral(sample(grid, [](double t) { return t; }), 0.5);
  const double oracle = rl_reference([](double s) { return s; }, 0.5, 1.0);
  EXPECT_NEAR(oracle, 0.75225277806367504, 1e-8);
  // Piecewise-linear data is integrated exactly.
  EXPECT_NEAR(out[16], 1.0 / std::tgamma(2.5), 1e-14);
  EXPECT_NEAR(out[16], oracle, 1e-8);
}

TEST(RlIntegral, ZeroMapsToZero) {
  const TimeGrid grid(1.0, 10);
  const TimeSeries out = rl_integral(TimeSeries(grid, Eigen::VectorXd::Zero(11)), 1.3);
  EXPECT_EQ(out.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(RlIntegral, RejectsBadOrder) {
  const TimeSeries v = sample(TimeGrid(1.0, 4), [](double t) { return t; });
  EXPECT_THROW(rl_integral(v, 0.0), std::invalid_argument);
  EXPECT_THROW(rl_integral(v, 2.5), std::invalid_argument);
  EXPECT_NO_THROW(rl_integral(v, 2.0));
}

TEST(RlIntegral, MatchesReferenceForSmoothData) {
  auto v = [](double t) { return std::cos(3 * t) + t * t; };
  const TimeGrid grid(1.0, 400);
  const TimeSeries out = rl_integral(sample(grid, v), 1.7);
  for (int k : {100, 250, 400}) {
    EXPECT_NEAR(out[k], rl_reference(v, 1.7, grid.node(k)), 1e-5);
  }
}

TEST(RlIntegral, SemigroupUnderRefinement) {
  auto v = [](double t) { return std::sin(2 * t) + 1.0; };
  for (double a : {0.3, 0.7, 1.0}) {
    for (double b : {0.4, 1.0}) {
      double prev = 0.0;
      for (int steps : {64, 128, 256}) {
        const TimeGrid grid(1.0, steps);
        const TimeSeries vs = sample(grid, v);
        const Eigen::VectorXd diff = rl_integral(rl_integral(vs, b), a).values() -
                                     rl_integral(vs, a + b).values();
        const double err = diff.cwiseAbs().maxCoeff();
        EXPECT_LE(err, 2.0 * grid.dt()) << a << ' ' << b << ' ' << steps;
        if (prev > 0.0) EXPECT_LT(err, prev);
        prev = err;
      }
    }
  }
}

TEST(CaputoDerivative, AnnihilatesAffine) {
  const TimeGrid grid(2.0, 20);
  const TimeSeries out = caputo_derivative(sample(grid, [](double t) { return 3.0 - 2.0 * t; }), 1.4);
  EXPECT_LT(out.values().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CaputoDerivative, SquareHasClosedForm) {
  const double order = 1.5;
  const TimeGrid grid(1.0, 50);
  const TimeSeries out = caputo_derivative(sample(grid, [](double t) { return t * t; }), order);
  for (int k = 0; k <= 50; ++k) {
    const double t = grid.node(k);
    // Defining integral with v'' = 2 evaluated in closed form.
    const double exact = 2.0 * std::pow(t, 2.0 - order) / std::tgamma(3.0 - order);
    EXPECT_NEAR(out[k], exact, 1e-9);
  }
  // Independent check of the closed form at t = 1 by quadrature.
  const double quad = rl_reference([](double) { return 2.0; }, 2.0 - order, 1.0);
  EXPECT_NEAR(out[50], quad, 1e-7);
}

TEST(CaputoDerivative, LeftInverseOfRlIntegral) {
  const double order = 1.5;
  auto w = [](double t) { return std::sin(t) * t; };
  double prev = 0.0;
  for (int steps : {128, 256, 512}) {
    const TimeGrid grid(1.0, steps);
    const TimeSeries ws = sample(grid, w);
    const TimeSeries back = caputo_derivative(rl_integral(ws, order), order);
    const double err = (back.values() - ws.values()).cwiseAbs().maxCoeff();
    EXPECT_LE(err, 5.0 * grid.dt());
    if (prev > 0.0) EXPECT_LE(err, 0.6 * prev);
    prev = err;
  }
}

TEST(CaputoDerivative, RejectsShortGridAndBadOrder) {
  EXPECT_THROW(caputo_derivative(sample(TimeGrid(1.0, 2), [](double t) { return t; }), 1.5),
               std::invalid_argument);
  const TimeSeries v = sample(TimeGrid(1.0, 8), [](double t) { return t; });
  EXPECT_THROW(caputo_derivative(v, 1.0), std::invalid_argument);
  EXPECT_THROW(caputo_derivative(v, 2.0), std::invalid_argument);
}

TEST(Linearity, AllOperations) {
  const TimeGrid grid(1.0, 64);
  const TimeSeries f = sample(grid, [](double t) { return std::exp(t); });
  const TimeSeries g = sample(grid, [](double t) { return t * t * t; });
  const TimeSeries combo(grid, 2.0 * f.values() - 3.0 * g.values());
  const auto check = [&](auto op) {
    const Eigen::VectorXd lhs = op(combo).values();
    const Eigen::VectorXd rhs = 2.0 * op(f).values() - 3.0 * op(g).values();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  };
  check([](const TimeSeries& v) { return rl_integral(v, 0.6); });
  check([](const TimeSeries& v) { return caputo_derivative(v, 1.6); });
  const Complex p(1.5, 0.5);
  const Complex lhs = laplace_numeric(combo, p).value;
  const Complex rhs = 2.0 * laplace_numeric(f, p).value - 3.0 * laplace_numeric(g, p).value;
  EXPECT_LT(std::abs(lhs - rhs), 1e-12);
}

TEST(WaveDerivativeWeights, MatchFactoredBinomialSeries) {
  // (3/2 - 2z + z^2/2)^a = (3/2)^a (1 - z)^a (1 - z/3)^a.
  const double order = 1.5, dt = 0.1;
  const int steps = 30;
  const WaveDerivativeWeights weights(order, dt, steps);
  std::vector<double> f(steps + 1), g(steps + 1);
  f[0] = g[0] = 1.0;
  for (int j = 1; j <= steps; ++j) {
    f[j] = f[j - 1] * (j - 1 - order) / j;
    g[j] = g[j - 1] * (j - 1 - order) / (3.0 * j);
  }
  for (int n = 0; n <= steps; ++n) {
    double c = 0.0;
    for (int j = 0; j <= n; ++j) c += f[j] * g[n - j];
    c *= std::pow(1.5, order) * std::pow(dt, -order);
    EXPECT_NEAR(weights.lag_weight(n), c, 1e-12 * std::abs(weights.lag_weight(0))) << n;
  }
}

TEST(WaveDerivativeWeights, SecondOrderForSquare) {
  // w = t^2: D w = 2 t^(2-a) / Gamma(3-a).
  const double order = 1.3;
  const double exact = 2.0 / std::tgamma(3.0 - order);
  double prev = 0.0;
  for (int steps : {20, 40, 80, 160}) {
    const double dt = 1.0 / steps;
    const WaveDerivativeWeights weights(order, dt, steps);
    auto w = [&](int j) { return (j * dt) * (j * dt); };
    double acc = weights.leading() * w(steps);
    weights.history_sum(steps, acc, w);
    const double err = std::abs(acc - exact);
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.5) << steps;
    prev = err;
  }
}

TEST(WaveDerivativeWeights, AnnihilatesZeroHistory) {
  const WaveDerivativeWeights weights(1.5, 0.1, 10);
  double acc = 0.0;
  weights.history_sum(7, acc, [](int) { return 0.0; });
  EXPECT_EQ(acc, 0.0);
  EXPECT_GT(weights.leading(), 0.0);
}

TEST(MittagLeffler, Identities) {
  EXPECT_NEAR(std::abs(mittag_leffler(1.3, 2.0, 0.0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(mittag_leffler(1.5, 2.5, 0.0).real(), 1.0 / std::tgamma(2.5), 1e-15);
  EXPECT_NEAR(mittag_leffler(1.0, 1.0, 1.0).real(), std::numbers::e, 1e-12);
  EXPECT_NEAR(mittag_leffler(2.0, 1.0, -1.0).real(), std::cos(1.0), 1e-12);
  for (double t = 0.1; t < 3.05; t += 0.1) {
    EXPECT_NEAR(mittag_leffler(2.0, 1.0, -t * t).real(), std::cos(t), 1e-10);
  }
  // E_{2,2}(-t^2) = sin(t) / t, exercised on both sides of the switch.
  for (double t : {1.0, 3.0, 4.0, 6.0}) {
    EXPECT_NEAR(mittag_leffler(2.0, 2.0, -t * t).real(), std::sin(t) / t, 1e-10) << t;
  }
  for (double x : {-30.0, -12.0, 12.0, 25.0}) {
    EXPECT_NEAR(mittag_leffler(1.0, 1.0, x).real(), std::exp(x), 1e-10 * std::max(1.0, std::exp(x)));
  }
}

struct MlCase {
  double alpha, beta;
  Complex z, expected;
};

// From tests/oracles/mittag_leffler_mpmath.py (80-digit series).
const MlCase kMlCases[] = {
    {1.5, 1.0, {-1.0, 0.0}, {0.39662936531808808449, 0.0}},
    {1.5, 2.0, {-1.0, 0.0}, {0.73748224790189471418, 0.0}},
    {1.5, 1.0, {-8.0, 0.0}, {-0.20287153923872816229, 0.0}},
    {1.5, 1.0, {-12.0, 0.0}, {-0.038863323267440968184, 0.0}},
    {1.5, 2.0, {-12.0, 0.0}, {0.032363733508080087578, 0.0}},
    {1.5, 1.0, {-30.0, 0.0}, {-0.014470224834105874553, 0.0}},
    {1.5, 1.0, {-50.0, 0.0}, {-0.0045783851058392779913, 0.0}},
    {1.5, 2.0, {-50.0, 0.0}, {0.011167669745851065095, 0.0}},
    {1.5, 1.0, {20.0, 0.0}, {1056.3880787316900215, 0.0}},
    {1.5, 1.0, {-20.0, 15.0}, {-0.19064286076991552913, 0.22932521845093160515}},
    {1.25, 1.0, {10.0, -30.0}, {3056.718454395855128, -2925.7139823703476033}},
    {1.75, 2.0, {-45.0, 0.0}, {0.021954000469646023174, 0.0}},
    {1.0, 1.0, {-40.0, 0.0}, {4.2483542552915889953e-18, 0.0}},
    {2.0, 1.0, {-40.0, 0.0}, {0.99914438304692955012, 0.0}},
    {1.9, 1.0, {-25.0, 0.0}, {0.43534902705681804333, 0.0}},
    {1.5, 1.0, {-4356.0, 0.0}, {-0.000064760008413214340608, 0.0}},
};

TEST(MittagLeffler, MatchesHighPrecisionReference) {
  for (const MlCase& c : kMlCases) {
    const Complex got = mittag_leffler(c.alpha, c.beta, c.z);
    const double tol = 1e-10 * std::max(1.0, std::abs(c.expected));
    EXPECT_NEAR(std::abs(got - c.expected), 0.0, tol)
        << c.alpha << ' ' << c.beta << ' ' << c.z << " got " << got;
  }
}

TEST(MittagLeffler, MatchesTruncatedSeries) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(0.0, 5.0), angle(-std::numbers::pi, std::numbers::pi),
      alpha_dist(1.0, 2.0), beta_dist(0.5, 2.5);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = alpha_dist(rng), beta = beta_dist(rng);
    const Complex z = std::polar(radius(rng), angle(rng));
    Complex series = 0.0;
    for (int k = 0; k < 200; ++k) series += std::pow(z, k) / std::tgamma(alpha * k + beta);
    EXPECT_LT(std::abs(mittag_leffler(alpha, beta, z) - series), 1e-12) << alpha << ' ' << beta << ' ' << z;
  }
}

TEST(MittagLeffler, RoutesAgreeNearSwitch) {
  for (double alpha : {1.0, 1.2, 1.5, 1.8}) {
    for (double radius : {6.0, 10.0}) {
      for (double phase : {0.0, 1.0, 2.0, 3.0}) {
        const Complex z = std::polar(radius, phase);
        const Complex series = detail::mittag_leffler_series(alpha, 1.0, z);
        const Complex contour = detail::mittag_leffler_contour(alpha, 1.0, z);
        EXPECT_LT(std::abs(series - contour), 1e-10 * std::max(1.0, std::abs(series)))
            << alpha << ' ' << z;
      }
    }
  }
}

TEST(MittagLeffler, ReportsUnsupportedRegimes) {
  EXPECT_THROW(mittag_leffler(0.0, 1.0, 1.0), std::domain_error);
  EXPECT_THROW(mittag_leffler(1.5, -1.0, 20.0), std::domain_error);
  EXPECT_THROW(mittag_leffler(1.0, 1.5, -20.0), std::domain_error);
}

TEST(LaplaceNumeric, ConstantAndLinear) {
  const TimeGrid long_grid(40.0, 40000);
  const LaplaceValue one = laplace_numeric(sample(long_grid, [](double) { return 1.0; }), 1.0);
  EXPECT_NEAR(one.value.real(), 1.0, 1e-6);
  EXPECT_NEAR(one.truncation_bound, std::exp(-40.0), 1e-25);

  const TimeGrid grid(20.0, 20000);
  const LaplaceValue lin = laplace_numeric(sample(grid, [](double t) { return t; }), 2.0);
  EXPECT_NEAR(lin.value.real(), 0.25, 1e-6);
  EXPECT_LT(lin.truncation_bound, 1e-15);
}

TEST(LaplaceNumeric, MittagLefflerTransformPair) {
  const double alpha = 1.5;
  const TimeGrid grid(20.0, 20000);
  const TimeSeries v = sample(grid, [&](double t) {
    return mittag_leffler(alpha, 1.0, -std::pow(t, alpha)).real();
  });
  const Complex p = 2.0;
  const Complex exact = std::pow(p, alpha - 1.0) / (std::pow(p, alpha) + 1.0);
  // Oracle: same integral on a 4x finer grid.
  const TimeGrid fine(20.0, 80000);
  const TimeSeries vf = sample(fine, [&](double t) {
    return mittag_leffler(alpha, 1.0, -std::pow(t, alpha)).real();
  });
  EXPECT_NEAR(std::abs(laplace_numeric(vf, p).value - exact), 0.0, 1e-7);
  EXPECT_NEAR(std::abs(laplace_numeric(v, p).value - exact), 0.0, 1e-6);
}

TEST(LaplaceNumeric, RejectsNonPositiveRealPart) {
  const TimeSeries v = sample(TimeGrid(1.0, 4), [](double) { return 1.0; });
  EXPECT_THROW(laplace_numeric(v, Complex(0.0, 1.0)), std::invalid_argument);
  EXPECT_THROW(laplace_numeric(v, Complex(-1.0, 0.0)), std::invalid_argument);
}

}  // namespace
}  // namespace fwave
