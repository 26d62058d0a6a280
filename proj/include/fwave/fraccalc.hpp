#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace fwave {

using Complex = std::complex<double>;

/// Uniform mesh t_k = k * T / K on [0, T], k = 0..K.
class TimeGrid {
 public:
  TimeGrid(double final_time, int steps);

  double final_time() const { return final_time_; }
  int steps() const { return steps_; }
  int node_count() const { return steps_ + 1; }
  double dt() const { return final_time_ / steps_; }
  double node(int k) const { return k == steps_ ? final_time_ : k * dt(); }
  Eigen::VectorXd nodes() const;

 private:
  double final_time_;
  int steps_;
};

/// Samples of a signal on every node of a TimeGrid.
template <typename Scalar>
class BasicTimeSeries {
 public:
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicTimeSeries(TimeGrid grid, Values values);

  const TimeGrid& grid() const { return grid_; }
  const Values& values() const { return values_; }
  Scalar operator[](int k) const { return values_[k]; }

 private:
  TimeGrid grid_;
  Values values_;
};

using TimeSeries = BasicTimeSeries<double>;
using ComplexTimeSeries = BasicTimeSeries<Complex>;

/// Samples f at every node of `grid`.
template <typename F>
TimeSeries sample(const TimeGrid& grid, F&& f) {
  Eigen::VectorXd v(grid.node_count());
  for (int k = 0; k < grid.node_count(); ++k) v[k] = f(grid.node(k));
  return TimeSeries(grid, std::move(v));
}

/// Writes "t,value" rows (or "t,value_re,value_im" for complex series).
void write_csv(std::ostream& out, const TimeSeries& series);
void write_csv(std::ostream& out, const ComplexTimeSeries& series);

/// Riemann-Liouville integral J^order v on the nodes of v's grid.
///
/// Product integration: v is reconstructed piecewise linearly and the kernel
/// (t - s)^(order - 1) is integrated exactly against each hat function, so the
/// result is exact for piecewise-linear v. Accepts 0 < order <= 2.
TimeSeries rl_integral(const TimeSeries& v, double order);

/// Weight matrix row k of rl_integral: (J^order v)(t_k) = sum_j w_j v_j.
Eigen::VectorXd rl_weights(int k, double order, double dt);

/// Caputo derivative (1/Gamma(2-order)) int_0^t (t-s)^(1-order) v''(s) ds for
/// 1 < order < 2.
///
/// v'' is replaced by central second differences at interior nodes and by
/// second-order one-sided stencils at t_0 and t_K, then integrated with the
/// rl_integral weights of order 2 - order. Requires K >= 3.
TimeSeries caputo_derivative(const TimeSeries& v, double order);

/// Convolution quadrature for the Caputo derivative of order 1 < order < 2
/// acting on w with w(0) = w'(0) = 0, generated by second-order backward
/// differences:
///   D_k w = dt^-order sum_{j=0..k} omega_{k-j} w_j,
///   sum_j omega_j z^j = (3/2 - 2 z + z^2 / 2)^order.
/// A source g0 that is constant in time needs the start-up correction
/// g_1 += g0 / 2 to keep second order (t^alpha-type solutions included).
class WaveDerivativeWeights {
 public:
  WaveDerivativeWeights(double order, double dt, int steps);

  static constexpr double kStartCorrection = 0.5;

  double order() const { return order_; }
  double dt() const { return dt_; }
  /// omega_m / dt^order.
  double lag_weight(int lag) const { return lag_[lag]; }
  /// Coefficient multiplying w_k in D_k w.
  double leading() const { return lag_[0]; }
  /// Adds sum_{j=1..k-1} omega_{k-j} w_j / dt^order to `acc`.
  /// `history(j)` must return w_j.
  template <typename Acc, typename History>
  void history_sum(int k, Acc& acc, History&& history) const;

 private:
  double order_;
  double dt_;
  std::vector<double> lag_;
};

/// E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta).
///
/// Power series for |z| <= 10; otherwise the Hankel-contour representation
/// of the inverse Laplace transform of s^(alpha-beta) / (s^alpha - z) at t = 1
/// with the principal-sheet poles removed analytically and added back as
/// residues. The contour route needs beta > 0 and throws std::domain_error
/// when a pole sits on the branch cut. Absolute accuracy ~1e-10 for
/// |z| <= 50, alpha in [1, 2].
Complex mittag_leffler(double alpha, double beta, Complex z);

namespace detail {
// The two evaluation routes of mittag_leffler, exposed for cross-checks.
Complex mittag_leffler_series(double alpha, double beta, Complex z);
Complex mittag_leffler_contour(double alpha, double beta, Complex z);
}  // namespace detail

struct LaplaceValue {
  Complex value;
  /// e^{-Re(p) T} * max|v|: bound on the neglected tail for bounded v.
  double truncation_bound;
};

/// Trapezoid approximation of int_0^T e^{-pt} v(t) dt. Requires Re p > 0.
LaplaceValue laplace_numeric(const TimeSeries& v, Complex p);
LaplaceValue laplace_numeric(const ComplexTimeSeries& v, Complex p);

// Implementation details below.

template <typename Acc, typename History>
void WaveDerivativeWeights::history_sum(int k, Acc& acc,
                                        History&& history) const {
  for (int j = 1; j < k; ++j) acc += lag_[k - j] * history(j);
}

}  // namespace fwave
