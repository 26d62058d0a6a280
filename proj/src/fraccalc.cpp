#include "fwave/fraccalc.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fwave {

namespace {

constexpr double kPi = std::numbers::pi;

void require_order(double order, double lo, bool lo_open, double hi,
                   bool hi_open, const char* what) {
  const bool ok = (lo_open ? order > lo : order >= lo) &&
                  (hi_open ? order < hi : order <= hi);
  if (!ok || !std::isfinite(order)) {
    throw std::invalid_argument(std::string(what) + ": order " +
                                std::to_string(order) + " out of range");
  }
}

// 1 / Gamma(x), zero at the poles.
double rgamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  if (x < 170.0) return 1.0 / std::tgamma(x);
  return std::exp(-std::lgamma(x));
}

bool is_integer(double x) { return x == std::floor(x); }

Complex ml_series(double alpha, double beta, Complex z) {
  if (z == Complex(0.0)) return rgamma(beta);
  const double log_abs = std::log(std::abs(z));
  const double arg = std::arg(z);
  Complex sum = rgamma(beta);
  int quiet = 0;
  constexpr int kMaxTerms = 4000;
  for (int k = 1; k < kMaxTerms; ++k) {
    const double g = alpha * k + beta;
    Complex term;
    if (g > 0.0) {
      const double mag = std::exp(k * log_abs - std::lgamma(g));
      term = std::polar(mag, k * arg);
    } else {
      term = std::pow(z, k) * rgamma(g);
    }
    sum += term;
    // Terms decrease monotonically once alpha*k + beta passes |z|^(1/alpha).
    if (std::abs(term) <= 1e-17 * std::max(1.0, std::abs(sum)) && g > 1.0 &&
        std::pow(std::abs(z), 1.0 / alpha) < g) {
      if (++quiet >= 3) return sum;
    } else {
      quiet = 0;
    }
  }
  throw std::domain_error("mittag_leffler: power series did not converge");
}

struct Pole {
  Complex s;
  Complex residue;
};

// Poles of s^(alpha-beta) / (s^alpha - z) on the principal sheet.
std::vector<Pole> principal_poles(double alpha, double beta, Complex z) {
  std::vector<Pole> poles;
  if (z == Complex(0.0)) return poles;
  const double radius = std::pow(std::abs(z), 1.0 / alpha);
  const double arg = std::arg(z);
  const bool no_cut = is_integer(alpha) && is_integer(beta);
  const int kmax = static_cast<int>(std::ceil(alpha)) + 1;
  for (int k = -kmax; k <= kmax; ++k) {
    const double theta = (arg + 2.0 * kPi * k) / alpha;
    const double edge = std::abs(std::abs(theta) - kPi);
    if (edge < 1e-12) {
      if (!no_cut) {
        throw std::domain_error("mittag_leffler: pole on the branch cut");
      }
      if (theta < 0.0) continue;  // same point as theta = +pi
    } else if (std::abs(theta) > kPi) {
      continue;
    }
    const Complex s = std::polar(radius, theta);
    poles.push_back({s, std::pow(s, 1.0 - beta) / alpha});
  }
  return poles;
}

// Optimized cotangent contour for inverting a Laplace transform at t = 1.
struct ContourNode {
  Complex s;
  Complex ds;
};

ContourNode cotangent_node(double theta, double scale) {
  constexpr double kSigma = 0.6122, kMu = 0.5017, kA = 0.6407, kNu = 0.2645;
  const double c = std::cos(kA * theta), sn = std::sin(kA * theta);
  const double cot = c / sn;
  const Complex s = scale * Complex(kMu * theta * cot - kSigma, kNu * theta);
  const Complex ds =
      scale * Complex(kMu * (cot - kA * theta / (sn * sn)), kNu);
  return {s, ds};
}

Complex ml_contour(double alpha, double beta, Complex z) {
  if (beta <= 0.0) {
    throw std::domain_error(
        "mittag_leffler: contour representation needs beta > 0");
  }
  const std::vector<Pole> poles = principal_poles(alpha, beta, z);

  Complex result = 0.0;
  for (const Pole& p : poles) result += p.residue * std::exp(p.s);

  // Pole-free remainder: its singularities lie on the cut, inside the contour.
  auto remainder = [&](Complex s) {
    Complex g = std::pow(s, alpha - beta) / (std::pow(s, alpha) - z);
    for (const Pole& p : poles) g -= p.residue / (s - p.s);
    return g;
  };

  for (int nodes = 32; nodes <= 64; nodes += 2) {
    const double h = 2.0 * kPi / nodes;
    double closest = std::numeric_limits<double>::infinity();
    Complex sum = 0.0;
    for (int k = 0; k < nodes; ++k) {
      const double theta = -kPi + (k + 0.5) * h;
      const ContourNode node = cotangent_node(theta, nodes);
      for (const Pole& p : poles) {
        closest = std::min(closest, std::abs(node.s - p.s) /
                                        std::max(1.0, std::abs(p.s)));
      }
      sum += std::exp(node.s) * remainder(node.s) * node.ds;
    }
    // A node almost on a pole loses digits to cancellation; shift the nodes.
    if (closest < 1e-3) continue;
    return result + sum * h / (2.0 * kPi * Complex(0.0, 1.0));
  }
  throw std::domain_error("mittag_leffler: contour nodes collide with poles");
}

}  // namespace

TimeGrid::TimeGrid(double final_time, int steps)
    : final_time_(final_time), steps_(steps) {
  if (!(final_time > 0.0) || !std::isfinite(final_time)) {
    throw std::invalid_argument("TimeGrid: final time must be positive");
  }
  if (steps < 2) throw std::invalid_argument("TimeGrid: need at least 2 steps");
}

Eigen::VectorXd TimeGrid::nodes() const {
  Eigen::VectorXd t(node_count());
  for (int k = 0; k < node_count(); ++k) t[k] = node(k);
  return t;
}

template <typename Scalar>
BasicTimeSeries<Scalar>::BasicTimeSeries(TimeGrid grid, Values values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.node_count()) {
    throw std::invalid_argument("TimeSeries: length does not match grid");
  }
}

template class BasicTimeSeries<double>;
template class BasicTimeSeries<Complex>;

void write_csv(std::ostream& out, const TimeSeries& series) {
  const auto old = out.precision(17);
  out << "t,value\n";
  for (int k = 0; k < series.grid().node_count(); ++k) {
    out << series.grid().node(k) << ',' << series[k] << '\n';
  }
  out.precision(old);
}

void write_csv(std::ostream& out, const ComplexTimeSeries& series) {
  const auto old = out.precision(17);
  out << "t,value_re,value_im\n";
  for (int k = 0; k < series.grid().node_count(); ++k) {
    out << series.grid().node(k) << ',' << series[k].real() << ','
        << series[k].imag() << '\n';
  }
  out.precision(old);
}

Eigen::VectorXd rl_weights(int k, double order, double dt) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k + 1);
  if (k == 0) return w;
  const double e = order + 1.0;
  const double scale = std::pow(dt, order) / std::tgamma(order + 2.0);
  w[0] = std::pow(k - 1.0, e) - (k - 1.0 - order) * std::pow(k, order);
  for (int j = 1; j < k; ++j) {
    const double m = k - j;
    w[j] = std::pow(m + 1.0, e) - 2.0 * std::pow(m, e) + std::pow(m - 1.0, e);
  }
  w[k] = 1.0;
  return scale * w;
}

TimeSeries rl_integral(const TimeSeries& v, double order) {
  require_order(order, 0.0, true, 2.0, false, "rl_integral");
  const TimeGrid& grid = v.grid();
  const int steps = grid.steps();
  const double e = order + 1.0;
  // Moments m^(order+1) shared by every row.
  std::vector<double> pw(steps + 2);
  for (int m = 0; m <= steps + 1; ++m) pw[m] = std::pow(m, e);
  const double scale = std::pow(grid.dt(), order) / std::tgamma(order + 2.0);

  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.node_count());
  for (int k = 1; k <= steps; ++k) {
    double acc = (pw[k - 1] - (k - 1.0 - order) * std::pow(k, order)) * v[0];
    for (int j = 1; j < k; ++j) {
      const int m = k - j;
      acc += (pw[m + 1] - 2.0 * pw[m] + pw[m - 1]) * v[j];
    }
    acc += v[k];
    out[k] = scale * acc;
  }
  return TimeSeries(grid, std::move(out));
}

TimeSeries caputo_derivative(const TimeSeries& v, double order) {
  require_order(order, 1.0, true, 2.0, true, "caputo_derivative");
  const TimeGrid& grid = v.grid();
  const int steps = grid.steps();
  if (steps < 3) {
    throw std::invalid_argument("caputo_derivative: need K >= 3");
  }
  const double inv_dt2 = 1.0 / (grid.dt() * grid.dt());
  Eigen::VectorXd second(grid.node_count());
  second[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) * inv_dt2;
  for (int k = 1; k < steps; ++k) {
    second[k] = (v[k + 1] - 2.0 * v[k] + v[k - 1]) * inv_dt2;
  }
  second[steps] = (2.0 * v[steps] - 5.0 * v[steps - 1] + 4.0 * v[steps - 2] -
                   v[steps - 3]) *
                  inv_dt2;
  return rl_integral(TimeSeries(grid, std::move(second)), 2.0 - order);
}

WaveDerivativeWeights::WaveDerivativeWeights(double order, double dt,
                                             int steps)
    : order_(order), dt_(dt), lag_(steps + 1) {
  require_order(order, 1.0, true, 2.0, true, "WaveDerivativeWeights");
  // Power of a polynomial, J.C.P. Miller recurrence on (3/2, -2, 1/2).
  const double poly[3] = {1.5, -2.0, 0.5};
  lag_[0] = std::pow(poly[0], order);
  for (int n = 1; n <= steps; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= std::min(2, n); ++k) {
      acc += ((order + 1.0) * k - n) * poly[k] * lag_[n - k];
    }
    lag_[n] = acc / (n * poly[0]);
  }
  const double scale = std::pow(dt, -order);
  for (double& w : lag_) w *= scale;
}

Complex mittag_leffler(double alpha, double beta, Complex z) {
  if (!(alpha > 0.0) || !std::isfinite(beta) || !std::isfinite(z.real()) ||
      !std::isfinite(z.imag())) {
    throw std::domain_error("mittag_leffler: invalid parameters");
  }
  if (std::abs(z) <= 10.0) return ml_series(alpha, beta, z);
  return ml_contour(alpha, beta, z);
}

namespace detail {

Complex mittag_leffler_series(double alpha, double beta, Complex z) {
  return ml_series(alpha, beta, z);
}

Complex mittag_leffler_contour(double alpha, double beta, Complex z) {
  return ml_contour(alpha, beta, z);
}

}  // namespace detail

namespace {

template <typename Scalar>
LaplaceValue laplace_impl(const BasicTimeSeries<Scalar>& v, Complex p) {
  if (!(p.real() > 0.0)) {
    throw std::invalid_argument("laplace_numeric: need Re p > 0");
  }
  const TimeGrid& grid = v.grid();
  const int steps = grid.steps();
  const double dt = grid.dt();
  Complex acc = 0.0;
  double sup = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double weight = (k == 0 || k == steps) ? 0.5 : 1.0;
    acc += weight * std::exp(-p * grid.node(k)) * Complex(v[k]);
    sup = std::max(sup, std::abs(Complex(v[k])));
  }
  return {acc * dt, std::exp(-p.real() * grid.final_time()) * sup};
}

}  // namespace

LaplaceValue laplace_numeric(const TimeSeries& v, Complex p) {
  return laplace_impl(v, p);
}

LaplaceValue laplace_numeric(const ComplexTimeSeries& v, Complex p) {
  return laplace_impl(v, p);
}

}  // namespace fwave
