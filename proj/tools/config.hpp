#pragma once

// Experiment configuration: an INI file whose sections mirror the modules.
//
//   [problem]      dim, domain, nodes, a11 a12 a22 b1 b2 c, alpha, T, K, a, b,
//                  matrix (explicit operator, rows separated by '|')
//   [spectral]     cluster_tol, contour_nodes
//   [solver]       route, contour_nodes, output_times | output_count
//   [observation]  box | nodes, times | time_count + final_time, route,
//                  timestep_steps, precision (double | extended), rank_tol
//   [inversion]    regularization (tikhonov | tsvd), lambda, truncation,
//                  noise, seed
//   [output]       dir
//
// Values may carry a trailing '; comment'. Unknown sections or keys are
// errors.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "fwave/elliptic.hpp"
#include "fwave/solver.hpp"

namespace fwave::cli {

/// Bad configuration input; the message names the file, line and field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  int dim = 1;
  std::vector<double> domain{0.0, 1.0};  // x0 x1 [y0 y1]
  std::vector<int> nodes{32};            // interior nodes per axis
  std::string a11 = "1", a12 = "0", a22 = "1", b1 = "0", b2 = "0", c = "0";
  std::string matrix;                    // overrides the mesh when set
  double alpha = 1.5;
  double final_time = 1.0;
  int steps = 1024;
  std::string a = "0", b = "0";          // expressions, or numbers with `matrix`
};

struct SpectralConfig {
  std::optional<double> cluster_tol;
  int contour_nodes = 64;
};

struct SolverConfig {
  std::string route = "all";
  int contour_nodes = 48;
  std::vector<double> output_times;  // empty: output_count grid nodes
  int output_count = 10;
};

struct ObservationConfig {
  std::vector<double> box{0.0, 0.25};
  std::vector<int> nodes;            // explicit indices override `box`
  std::vector<double> times;         // explicit; else time_count uniform
  int time_count = 64;
  std::optional<double> final_time;  // default: problem T
  std::string route = "spectral";
  int timestep_steps = 1024;
  std::string precision = "double";
  std::optional<double> rank_tol;
};

struct InversionConfig {
  std::string regularization = "tikhonov";
  double lambda = 1e-8;  // relative: lambda_reg = lambda * sigma_1^2
  int truncation = 0;
  double noise = 0.0;
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
  ProblemConfig problem;
  SpectralConfig spectral;
  SolverConfig solver;
  ObservationConfig observation;
  InversionConfig inversion;
  std::string out_dir = "fwave-out";
  std::string origin = "<defaults>";

  /// Fully resolved configuration, defaults included.
  nlohmann::ordered_json to_json() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Operator and data built from a ProblemConfig.
struct Problem {
  Eigen::MatrixXd a_op;
  std::optional<Mesh> mesh;  // absent for explicit matrices
  SourcePair data;
};

Problem build_problem(const ProblemConfig& cfg);

/// Observed node indices and times resolved against a problem.
std::vector<int> observation_nodes(const ObservationConfig& cfg, const Problem& p);
std::vector<double> observation_times(const ObservationConfig& cfg, double problem_t);

}  // namespace fwave::cli
