#include "fwave/extended.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace fwave {

namespace {

using MatrixQ = Eigen::Matrix<Real128, Eigen::Dynamic, Eigen::Dynamic>;
using MatrixCQ = Eigen::Matrix<Complex128, Eigen::Dynamic, Eigen::Dynamic>;
using VectorCQ = Eigen::Matrix<Complex128, Eigen::Dynamic, 1>;

const Real128 kPi128 = boost::math::constants::pi<Real128>();
const Real128 kEps128 = std::numeric_limits<Real128>::epsilon();

Complex128 series_128(const Real128& alpha, const Real128& beta, const Complex128& z) {
  if (z == Complex128(0)) return Complex128(1 / boost::multiprecision::tgamma(beta));
  const Complex128 log_z = log(z);
  const Real128 threshold = pow(abs(z), 1 / alpha);
  Complex128 sum = 1 / boost::multiprecision::tgamma(beta);
  int quiet = 0;
  for (int k = 1; k < 6000; ++k) {
    const Real128 g = alpha * k + beta;
    const Complex128 term = exp(Real128(k) * log_z - boost::multiprecision::lgamma(g));
    sum += term;
    if (abs(term) <= Real128(1e-36) * std::max(Real128(1), abs(sum)) && g > threshold) {
      if (++quiet >= 3) return sum;
    } else {
      quiet = 0;
    }
  }
  throw std::domain_error("mittag_leffler_128: power series did not converge");
}

struct Pole128 {
  Complex128 s;
  Complex128 residue;
};

Complex128 contour_128(const Real128& alpha, const Real128& beta, const Complex128& z) {
  if (!(beta > 0)) throw std::domain_error("mittag_leffler_128: needs beta > 0");
  std::vector<Pole128> poles;
  const Real128 radius = pow(abs(z), 1 / alpha);
  const Real128 arg_z = arg(z);
  for (int k = -3; k <= 3; ++k) {
    const Real128 theta = (arg_z + 2 * kPi128 * k) / alpha;
    if (abs(abs(theta) - kPi128) < Real128(1e-25)) {
      throw std::domain_error("mittag_leffler_128: pole on the branch cut");
    }
    if (abs(theta) > kPi128) continue;
    const Complex128 s = Complex128(radius * cos(theta), radius * sin(theta));
    poles.push_back({s, pow(s, 1 - beta) / alpha});
  }
  Complex128 result = 0;
  for (const Pole128& p : poles) result += p.residue * exp(p.s);

  const Real128 sigma = Real128(6122) / 10000, mu = Real128(5017) / 10000,
                a = Real128(6407) / 10000, nu = Real128(2645) / 10000;
  for (int nodes = 96; nodes <= 120; nodes += 2) {
    const Real128 h = 2 * kPi128 / nodes;
    Real128 closest = std::numeric_limits<Real128>::max();
    Complex128 sum = 0;
    for (int k = 0; k < nodes; ++k) {
      const Real128 theta = -kPi128 + (k + Real128(0.5)) * h;
      const Real128 sn = sin(a * theta), cot = cos(a * theta) / sn;
      const Complex128 s = Real128(nodes) * Complex128(mu * theta * cot - sigma, nu * theta);
      const Complex128 ds =
          Real128(nodes) * Complex128(mu * (cot - a * theta / (sn * sn)), nu);
      Complex128 g = pow(s, alpha - beta) / (pow(s, alpha) - z);
      for (const Pole128& p : poles) {
        g -= p.residue / (s - p.s);
        closest = std::min(closest, abs(s - p.s) / std::max(Real128(1), abs(p.s)));
      }
      sum += exp(s) * g * ds;
    }
    if (closest < Real128(1e-3)) continue;
    return result + sum * h / (2 * kPi128 * Complex128(0, 1));
  }
  throw std::domain_error("mittag_leffler_128: contour nodes collide with poles");
}

struct ModePair {
  Complex128 lambda;
  VectorCQ right;
  VectorCQ left;  // scaled so that left^H right = 1
};

ModePair refine(const MatrixCQ& a, Complex lambda0) {
  const int n = static_cast<int>(a.rows());
  Complex128 lambda(lambda0.real(), lambda0.imag());
  VectorCQ v(n), w(n);
  for (int i = 0; i < n; ++i) {
    v[i] = Complex128(1 + Real128(i) / n, Real128(1) / (i + 2));
    w[i] = Complex128(1 - Real128(i) / (2 * n), Real128(1) / (i + 3));
  }
  const MatrixCQ id = MatrixCQ::Identity(n, n);
  for (int it = 0; it < 4; ++it) {
    const MatrixCQ shifted = a - lambda * id;
    VectorCQ v_next = shifted.partialPivLu().solve(v);
    VectorCQ w_next = shifted.adjoint().partialPivLu().solve(w);
    // A shift equal to the eigenvalue to working precision can overflow.
    if (!v_next.allFinite() || !w_next.allFinite()) break;
    v = v_next / v_next.norm();
    w = w_next / w_next.norm();
    lambda = w.dot(a * v) / w.dot(v);
  }
  const Complex128 overlap = w.dot(v);
  if (abs(overlap) < Real128(1e-30)) {
    throw NumericalError("extended_injectivity: left and right eigenvectors are orthogonal");
  }
  return {lambda, v, w / conj(overlap)};
}

}  // namespace

Complex128 mittag_leffler_128(const Real128& alpha, const Real128& beta,
                              const Complex128& z) {
  if (!(alpha > 0)) throw std::domain_error("mittag_leffler_128: alpha must be positive");
  if (abs(z) <= 10) return series_128(alpha, beta, z);
  return contour_128(alpha, beta, z);
}

ExtendedInjectivity extended_injectivity(const Eigen::MatrixXd& a_op, double alpha,
                                         const ObservationSetup& setup) {
  const int n = static_cast<int>(a_op.rows());
  if (a_op.cols() != n) throw std::invalid_argument("operator must be square");
  setup.validate(n);
  const Eigensystem es = eigendecompose(a_op);
  for (const Cluster& c : es.clusters) {
    if (c.multiplicity != 1) {
      throw NumericalError("extended_injectivity: needs simple eigenvalues (cluster at " +
                           std::to_string(c.center.real()) + " has multiplicity " +
                           std::to_string(c.multiplicity) + ")");
    }
  }
  const MatrixCQ aq = a_op.cast<Complex128>();
  std::vector<ModePair> modes;
  ExtendedInjectivity out;
  for (const Cluster& c : es.clusters) {
    modes.push_back(refine(aq, c.center));
    const ModePair& m = modes.back();
    out.eigen_residual = std::max(
        out.eigen_residual,
        static_cast<double>((aq * m.right - m.lambda * m.right).norm() / m.right.norm()));
  }

  const int nodes = static_cast<int>(setup.omega.size());
  const int count = static_cast<int>(modes.size());
  MatrixCQ observed(nodes, count), weights(count, n);
  for (int k = 0; k < count; ++k) {
    for (int i = 0; i < nodes; ++i) observed(i, k) = modes[k].right[setup.omega[i]];
    weights.row(k) = modes[k].left.adjoint();
  }

  const Real128 a128(alpha);
  MatrixQ map(setup.rows(), 2 * n);
  for (std::size_t k = 0; k < setup.times.size(); ++k) {
    const Real128 t(setup.times[k]);
    const Real128 ta = pow(t, a128);
    VectorCQ e1(count), e2(count);
    for (int m = 0; m < count; ++m) {
      const Complex128 z = -modes[m].lambda * ta;
      e1[m] = mittag_leffler_128(a128, 1, z);
      e2[m] = t * mittag_leffler_128(a128, 2, z);
    }
    const MatrixCQ block_a = observed * e1.asDiagonal() * weights;
    const MatrixCQ block_b = observed * e2.asDiagonal() * weights;
    map.block(k * nodes, 0, nodes, n) = block_a.real();
    map.block(k * nodes, n, nodes, n) = block_b.real();
  }

  Eigen::Matrix<Real128, Eigen::Dynamic, 1> sv;
  if (map.rows() > map.cols()) {
    Eigen::HouseholderQR<MatrixQ> qr(map);
    const MatrixQ r = qr.matrixQR().topRows(map.cols()).triangularView<Eigen::Upper>();
    sv = Eigen::JacobiSVD<MatrixQ>(r).singularValues();
  } else {
    sv = Eigen::JacobiSVD<MatrixQ>(map).singularValues();
  }

  out.working_epsilon = static_cast<double>(kEps128);
  out.singular_values = sv.cast<double>();
  InjectivityReport& r = out.report;
  r.unknowns = 2 * n;
  const Real128 tol = Real128(std::max(map.rows(), map.cols())) * kEps128 * sv[0];
  for (int i = 0; i < sv.size(); ++i) r.rank += sv[i] > tol;
  r.sigma_max = static_cast<double>(sv[0]);
  r.sigma_min = sv.size() < r.unknowns ? 0.0 : static_cast<double>(sv[sv.size() - 1]);
  r.ratio = r.sigma_max > 0.0 ? r.sigma_min / r.sigma_max : 0.0;
  r.condition = r.sigma_min > 0.0 ? r.sigma_max / r.sigma_min
                                  : std::numeric_limits<double>::infinity();
  r.rank_tol = static_cast<double>(tol);
  r.injective = r.rank == r.unknowns && r.sigma_max > 0.0;
  r.verdict = r.injective ? "injective" : "not injective";
  return out;
}

}  // namespace fwave
