#pragma once

// Quad-precision (IEEE binary128) evaluation of the spectral-route
// observation map, for problems whose smallest singular values sit below
// double-precision rounding.

#include <boost/multiprecision/complex128.hpp>
#include <boost/multiprecision/float128.hpp>

#include <Eigen/Core>

#include "fwave/uniqueness.hpp"

namespace fwave {

using Real128 = boost::multiprecision::float128;
using Complex128 = boost::multiprecision::complex128;

/// E_{alpha,beta}(z) in binary128: power series for |z| <= 10, otherwise the
/// pole-subtracted cotangent-contour inversion with 96 nodes. Absolute
/// accuracy ~1e-26 for 1 <= alpha <= 2, beta > 0, |z| <= 5000.
Complex128 mittag_leffler_128(const Real128& alpha, const Real128& beta,
                              const Complex128& z);

struct ExtendedInjectivity {
  InjectivityReport report;         // rank threshold max(m, n) * eps_128 * sigma_max
  Eigen::VectorXd singular_values;  // descending, rounded to double
  double working_epsilon = 0.0;
  double eigen_residual = 0.0;      // max ||A v - lambda v|| / ||v|| after refinement
};

/// Spectral-route observation map (same layout as build_observation_map)
/// assembled and decomposed in binary128. Eigenpairs come from the double
/// eigensolver and are refined by inverse iteration; every eigenvalue must be
/// simple. Throws NumericalError otherwise.
ExtendedInjectivity extended_injectivity(const Eigen::MatrixXd& a_op, double alpha,
                                         const ObservationSetup& setup);

}  // namespace fwave
