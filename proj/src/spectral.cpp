#include "fwave/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace fwave {

namespace {

double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool complex_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

double default_cluster_tol(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return 1e-6 * svd.singularValues()[0];
}

Eigensystem eigendecompose(const Eigen::MatrixXd& a,
                           std::optional<double> cluster_tol) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw std::invalid_argument("eigendecompose: need a nonempty square matrix");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecompose: eigensolver did not converge");
  }
  Eigensystem out;
  out.eigenvalues = solver.eigenvalues();
  out.cluster_tol = cluster_tol.value_or(default_cluster_tol(a));

  std::vector<Complex> ev(out.eigenvalues.data(),
                          out.eigenvalues.data() + out.eigenvalues.size());
  std::sort(ev.begin(), ev.end(), complex_less);
  const int n = static_cast<int>(ev.size());

  // Single linkage via union-find.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(ev[i] - ev[j]) <= out.cluster_tol) parent[find(j)] = find(i);
    }
  }
  std::vector<std::vector<Complex>> groups;
  std::vector<int> group_of(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (group_of[root] < 0) {
      group_of[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[group_of[root]].push_back(ev[i]);
  }

  std::vector<double> spread;
  for (const auto& g : groups) {
    Complex mean = 0.0;
    for (const Complex& z : g) mean += z;
    mean /= static_cast<double>(g.size());
    double s = 0.0;
    for (const Complex& z : g) s = std::max(s, std::abs(z - mean));
    out.clusters.push_back({mean, 0.0, static_cast<int>(g.size())});
    spread.push_back(s);
  }
  std::vector<int> order(out.clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return complex_less(out.clusters[i].center, out.clusters[j].center);
  });
  std::vector<Cluster> sorted;
  std::vector<double> sorted_spread;
  for (int i : order) {
    sorted.push_back(out.clusters[i]);
    sorted_spread.push_back(spread[i]);
  }
  out.clusters = std::move(sorted);

  const double floor = 10.0 * out.cluster_tol;
  for (std::size_t i = 0; i < out.clusters.size(); ++i) {
    Cluster& c = out.clusters[i];
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < out.clusters.size(); ++j) {
      if (j != i) gap = std::min(gap, std::abs(c.center - out.clusters[j].center));
    }
    if (std::isinf(gap)) {
      c.radius = std::max(floor, 0.5 * std::max(1.0, std::abs(c.center)));
    } else {
      c.radius = std::max({0.5 * gap, floor, 2.0 * sorted_spread[i]});
    }
  }
  return out;
}

int numerical_rank(const Eigen::MatrixXcd& m, double rel_tol) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) rank += s[i] > rel_tol * s[0];
  return rank;
}

RieszProjector riesz_projection(const Eigen::MatrixXcd& a, Complex center,
                                double radius, int nodes) {
  if (!(radius > 0.0) || nodes < 4) {
    throw std::invalid_argument("riesz_projection: need radius > 0 and >= 4 nodes");
  }
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  const double a_norm = std::max(1.0, max_abs(a) * n);
  // Node contributions are summed in node order so the result is bit-stable.
  for (int m = 0; m < nodes; ++m) {
    const double theta = 2.0 * std::numbers::pi * (m + 0.5) / nodes;
    const Complex offset = std::polar(radius, theta);
    const Complex z = center + offset;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(z * id - a);
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14) || !(min_pivot > 1e-14 * a_norm)) {
      throw NumericalError("riesz_projection: contour node " + std::to_string(m) +
                           " is within ~" + std::to_string(min_pivot) +
                           " of the spectrum");
    }
    const Eigen::MatrixXcd resolvent = lu.solve(id);
    // dz / (2 pi i) = offset / nodes for the trapezoid rule on the circle.
    const Complex w = offset / static_cast<double>(nodes);
    p += w * resolvent;
    d += (w * offset) * resolvent;
  }
  const double p_norm = max_abs(p);
  const int rank = p_norm > 0.0 ? numerical_rank(p, 1e-8) : 0;
  return {center, radius, rank, std::move(p), std::move(d)};
}

RieszData riesz_data(const Eigen::MatrixXd& a, const Eigensystem& eig,
                     int nodes) {
  RieszData out{{}, nodes};
  const Eigen::MatrixXcd ac = a.cast<Complex>();
  for (const Cluster& c : eig.clusters) {
    out.clusters.push_back(riesz_projection(ac, c.center, c.radius, nodes));
  }
  return out;
}

double IdentityReport::worst() const {
  return std::max({idempotent, nilpotent_definition, commute, nilpotent_power});
}

std::vector<IdentityReport> verify_identities(const Eigen::MatrixXd& a,
                                              const RieszData& data,
                                              double tol) {
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXcd ac = a.cast<Complex>();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  std::vector<IdentityReport> out;
  for (const RieszProjector& c : data.clusters) {
    const Eigen::MatrixXcd& p = c.projector;
    const Eigen::MatrixXcd& d = c.nilpotent;
    IdentityReport r{};
    r.center = c.center;
    r.rank = c.rank;
    r.idempotent = max_abs(p * p - p);
    r.nilpotent_definition = max_abs(d - (ac - c.center * id) * p);
    r.commute = max_abs(d * p - p * d);
    Eigen::MatrixXcd power = p;
    for (int k = 0; k < c.rank; ++k) power = d * power;
    r.nilpotent_power = max_abs(power);
    r.pass = r.worst() <= tol;
    out.push_back(r);
  }
  return out;
}

Lemma3Result lemma3_check(const Eigen::MatrixXd& a, const RieszProjector& cluster,
                          const Eigen::VectorXcd& phi, double tol) {
  const Eigen::VectorXcd base = cluster.projector * phi;
  const double base_norm = base.norm();
  if (base_norm <= tol * std::max(1.0, phi.norm())) {
    return {0, 0.0, 0.0, "P phi vanishes: degenerate, no chain"};
  }
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXcd shifted =
      a.cast<Complex>() - cluster.center * Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXcd prev = base;
  const int limit = std::max(cluster.rank, 1);
  for (int k = 1; k <= limit; ++k) {
    const Eigen::VectorXcd next = cluster.nilpotent * prev;
    if (next.norm() <= tol * base_norm) {
      const double residual = (shifted * prev).norm();
      return {k, residual, residual / base_norm, ""};
    }
    prev = next;
  }
  throw NumericalError("lemma3_check: D^k P phi does not vanish for k <= d_n");
}

double completeness_defect(const RieszData& data) {
  if (data.clusters.empty()) return 0.0;
  const int n = static_cast<int>(data.clusters.front().projector.rows());
  Eigen::MatrixXcd sum = -Eigen::MatrixXcd::Identity(n, n);
  for (const RieszProjector& c : data.clusters) sum += c.projector;
  return max_abs(sum);
}

void write_spectrum_csv(std::ostream& out, const RieszData& data,
                        const std::vector<IdentityReport>& reports) {
  const auto old = out.precision(17);
  out << "re_lambda,im_lambda,d_n,gamma_n,idempotent,nilpotent_definition,"
         "commute,nilpotent_power\n";
  for (std::size_t i = 0; i < data.clusters.size(); ++i) {
    const RieszProjector& c = data.clusters[i];
    out << c.center.real() << ',' << c.center.imag() << ',' << c.rank << ','
        << c.radius;
    if (i < reports.size()) {
      const IdentityReport& r = reports[i];
      out << ',' << r.idempotent << ',' << r.nilpotent_definition << ','
          << r.commute << ',' << r.nilpotent_power;
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace fwave
