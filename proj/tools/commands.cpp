#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "expression.hpp"
#include "fwave/acceptance.hpp"
#include "fwave/extended.hpp"
#include "fwave/spectral.hpp"
#include "fwave/uniqueness.hpp"

namespace fwave::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    const Json& results, const std::vector<std::string>& files) {
  Json j;
  j["command"] = command;
  j["config_file"] = cfg.origin;
  j["config"] = cfg.to_json();
  j["outputs"] = files;
  j["results"] = results;
  open_output(dir / "manifest.json") << j.dump(2) << '\n';
}

std::vector<Route> routes_of(const std::string& name) {
  if (name == "all") return {Route::timestep, Route::resolvent, Route::spectral};
  return {parse_route(name)};
}

Json parameters_json(const SolutionField& u) {
  Json j = Json::object();
  for (const auto& [k, v] : u.parameters) j[k] = v;
  return j;
}

RieszData riesz_for(const Eigen::MatrixXd& a, const ExperimentConfig& cfg) {
  return riesz_data(a, eigendecompose(a, cfg.spectral.cluster_tol), cfg.spectral.contour_nodes);
}

ObservationSetup setup_for(const ExperimentConfig& cfg, const Problem& p, const Overrides& ov) {
  ObservationSetup s;
  s.omega = observation_nodes(cfg.observation, p);
  s.times = observation_times(cfg.observation, cfg.problem.final_time);
  const std::string route = ov.route.value_or(cfg.observation.route);
  if (route == "all") throw ConfigError("--route all is not meaningful for an observation map");
  s.route = parse_route(route);
  s.timestep_steps = cfg.observation.timestep_steps;
  s.contour.nodes = cfg.solver.contour_nodes;
  s.validate(static_cast<int>(p.a_op.rows()));
  return s;
}

Json injectivity_json(const InjectivityReport& r) {
  std::ostringstream s;
  write_injectivity_json(s, r);
  return Json::parse(s.str());
}

}  // namespace

void cmd_simulate(const ExperimentConfig& cfg, const Overrides& ov, const fs::path& out_dir,
                  std::ostream& log) {
  const Problem p = build_problem(cfg.problem);
  const double alpha = cfg.problem.alpha;
  const TimeGrid grid(cfg.problem.final_time, cfg.problem.steps);
  std::vector<double> times = cfg.solver.output_times;
  if (times.empty()) {
    const int count = cfg.solver.output_count;
    for (int j = 1; j <= count; ++j) {
      times.push_back(grid.node(static_cast<int>(std::lround(double(j) * grid.steps() / count))));
    }
  }
  const std::vector<Route> routes = routes_of(ov.route.value_or(cfg.solver.route));

  fs::create_directories(out_dir);
  std::vector<std::string> files;
  std::vector<std::pair<Route, SolutionField>> solved;
  Json results;
  for (Route r : routes) {
    SolutionField u;
    if (r == Route::timestep) {
      u = solve_timestep(p.a_op, p.data, alpha, grid);
    } else if (r == Route::resolvent) {
      LaplaceContour contour;
      contour.nodes = cfg.solver.contour_nodes;
      u = solve_resolvent(p.a_op, p.data, alpha, times, contour);
    } else {
      u = solve_spectral_oracle(riesz_for(p.a_op, cfg), p.data, alpha, times);
    }
    const std::string name = "solution_" + to_string(r) + ".csv";
    auto out = open_output(out_dir / name);
    write_solution_csv(out, u);
    files.push_back(name);
    results["routes"][to_string(r)] = parameters_json(u);
    solved.emplace_back(r, select_times(u, times));
  }

  auto diff = open_output(out_dir / "route_diff.csv");
  diff << "route_a,route_b,relative_difference\n";
  diff.precision(17);
  for (std::size_t i = 0; i < solved.size(); ++i) {
    for (std::size_t j = i + 1; j < solved.size(); ++j) {
      const double d = relative_difference(solved[i].second, solved[j].second);
      diff << to_string(solved[i].first) << ',' << to_string(solved[j].first) << ',' << d << '\n';
      results["relative_differences"][to_string(solved[i].first) + "-" +
                                      to_string(solved[j].first)] = d;
      log << to_string(solved[i].first) << " vs " << to_string(solved[j].first)
          << ": relative difference " << d << '\n';
    }
  }
  files.push_back("route_diff.csv");
  results["output_times"] = times;
  write_manifest(out_dir, "simulate", cfg, results, files);
  log << "wrote " << files.size() << " files to " << out_dir.string() << '\n';
}

void cmd_spectrum(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const Problem p = build_problem(cfg.problem);
  const Eigensystem es = eigendecompose(p.a_op, cfg.spectral.cluster_tol);
  const RieszData data = riesz_data(p.a_op, es, cfg.spectral.contour_nodes);
  const std::vector<IdentityReport> reports = verify_identities(p.a_op, data, 1e-8);

  fs::create_directories(out_dir);
  auto out = open_output(out_dir / "spectrum.csv");
  write_spectrum_csv(out, data, reports);
  auto eig = open_output(out_dir / "eigenvalues.csv");
  eig.precision(17);
  eig << "re,im\n";
  for (const Complex& z : es.eigenvalues) eig << z.real() << ',' << z.imag() << '\n';

  double worst = 0.0;
  int failing = 0;
  for (const IdentityReport& r : reports) {
    worst = std::max(worst, r.worst());
    failing += !r.pass;
  }
  const double completeness = completeness_defect(data);
  Json results = {{"clusters", data.clusters.size()},
                  {"cluster_tol", es.cluster_tol},
                  {"max_identity_residual", worst},
                  {"clusters_failing_1e-8", failing},
                  {"completeness_defect", completeness}};
  write_manifest(out_dir, "spectrum", cfg, results, {"spectrum.csv", "eigenvalues.csv"});
  log << data.clusters.size() << " clusters, max identity residual " << worst
      << ", ||sum P - I|| = " << completeness << '\n';
}

void cmd_observability(const ExperimentConfig& cfg, const Overrides& ov, const fs::path& out_dir,
                       std::ostream& log) {
  const Problem p = build_problem(cfg.problem);
  const ObservationSetup setup = setup_for(cfg, p, ov);
  const ObservationMap m = build_observation_map(p.a_op, cfg.problem.alpha, setup);
  const InjectivityReport report = injectivity_report(m, cfg.observation.rank_tol);

  fs::create_directories(out_dir);
  std::vector<std::string> files{"singular_values.csv", "injectivity.json"};
  auto sv = open_output(out_dir / "singular_values.csv");
  write_singular_values_csv(sv, m);
  auto js = open_output(out_dir / "injectivity.json");
  write_injectivity_json(js, report);
  Json results = {{"omega", setup.omega}, {"double", injectivity_json(report)}};
  log << "binary64: rank " << report.rank << '/' << report.unknowns << ", sigma_min/sigma_max "
      << report.ratio << ", verdict " << report.verdict << '\n';

  if (cfg.observation.precision == "extended") {
    if (setup.route != Route::spectral) {
      throw ConfigError("observation.precision = extended needs the spectral route");
    }
    const ExtendedInjectivity ext = extended_injectivity(p.a_op, cfg.problem.alpha, setup);
    auto ejs = open_output(out_dir / "injectivity_extended.json");
    write_injectivity_json(ejs, ext.report);
    auto esv = open_output(out_dir / "singular_values_extended.csv");
    esv.precision(17);
    esv << "index,sigma\n";
    for (int i = 0; i < ext.singular_values.size(); ++i) {
      esv << i << ',' << ext.singular_values[i] << '\n';
    }
    files.push_back("injectivity_extended.json");
    files.push_back("singular_values_extended.csv");
    results["extended"] = injectivity_json(ext.report);
    results["extended"]["eigen_residual"] = ext.eigen_residual;
    log << "binary128: rank " << ext.report.rank << '/' << ext.report.unknowns
        << ", sigma_min/sigma_max " << ext.report.ratio << ", verdict " << ext.report.verdict
        << '\n';
  }
  write_manifest(out_dir, "observability", cfg, results, files);
}

void cmd_invert(const ExperimentConfig& cfg, const Overrides& ov, const fs::path& out_dir,
                std::ostream& log) {
  const InversionConfig& inv = cfg.inversion;
  const std::optional<std::uint64_t> seed = ov.seed ? ov.seed : inv.seed;
  if (inv.noise > 0.0 && !seed) {
    throw ConfigError("inversion.noise > 0 needs an explicit seed (inversion.seed or --seed)");
  }
  const Problem p = build_problem(cfg.problem);
  const ObservationSetup setup = setup_for(cfg, p, ov);
  const ObservationMap m = build_observation_map(p.a_op, cfg.problem.alpha, setup);
  Eigen::VectorXd truth(2 * p.data.size());
  truth << p.data.a, p.data.b;
  Eigen::VectorXd data = m.matrix * truth;
  if (inv.noise > 0.0) data = add_relative_noise(data, inv.noise, *seed);

  Regularization reg;
  if (inv.regularization == "tsvd") {
    reg.kind = Regularization::Kind::truncated_svd;
    reg.truncation = inv.truncation;
  } else {
    reg.lambda = inv.lambda * m.singular_values[0] * m.singular_values[0];
  }
  const Recovery rec = invert_source(m, data, reg);
  Eigen::VectorXd x(truth.size());
  x << rec.a, rec.b;
  const double scale = truth.norm();
  const double error = scale > 0.0 ? (x - truth).norm() / scale : x.norm();

  fs::create_directories(out_dir);
  auto csv = open_output(out_dir / "recovery.csv");
  write_recovery_csv(csv, p.data, rec);
  Json results = {{"relative_error", error},
                  {"error_is_absolute", !(scale > 0.0)},
                  {"residual", rec.residual},
                  {"relative_residual", rec.relative_residual},
                  {"effective_condition", rec.effective_condition},
                  {"lambda_absolute", rec.lambda},
                  {"kept", rec.kept},
                  {"noise", inv.noise},
                  {"seed", seed ? Json(*seed) : Json(nullptr)}};
  write_manifest(out_dir, "invert", cfg, results, {"recovery.csv"});
  log << "relative error " << error << ", relative residual " << rec.relative_residual << '\n';
}

bool cmd_selftest(const Overrides& ov, const std::optional<fs::path>& out_dir, std::ostream& log) {
  AcceptanceOptions opts;
  if (ov.seed) opts.seed = *ov.seed;
  const std::vector<CriterionResult> results = run_acceptance(opts);
  print_results(log, results);
  bool all = true;
  Json j = Json::array();
  for (const CriterionResult& r : results) {
    all = all && r.pass;
    j.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"seconds", r.seconds},
                 {"detail", r.detail}});
  }
  if (out_dir) {
    fs::create_directories(*out_dir);
    open_output(*out_dir / "acceptance.json")
        << Json{{"seed", opts.seed}, {"criteria", j}}.dump(2) << '\n';
  }
  return all;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fwave: time-fractional diffusion-wave experiments"};
  app.set_version_flag("--version", "fwave 0.1");
  std::string config_path, out_path, route;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config, bool with_route) {
    auto* c = sub->add_option("--config", config_path, "experiment INI file");
    if (needs_config) c->required();
    sub->add_option("--out", out_path, "output directory (overrides output.dir)");
    if (with_route) {
      sub->add_option("--route", route, "timestep | resolvent | spectral | all")
          ->check(CLI::IsMember({"timestep", "resolvent", "spectral", "all"}));
    }
    sub->add_option("--seed", seed, "noise seed (overrides inversion.seed)");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "run solver routes, write solutions and route differences");
  CLI::App* spectrum = app.add_subcommand("spectrum", "eigensystem, Riesz projectors, identity residuals");
  CLI::App* observe = app.add_subcommand("observability", "observation map singular values and verdict");
  CLI::App* invert = app.add_subcommand("invert", "noisy inverse-source recovery");
  CLI::App* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  add_common(simulate, true, true);
  add_common(spectrum, true, false);
  add_common(observe, true, true);
  add_common(invert, true, true);
  add_common(selftest, false, false);
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  if (app.get_subcommands().empty()) {
    out << app.help();
    return kOk;
  }
  CLI::App* cmd = app.get_subcommands().front();
  Overrides ov;
  if (!route.empty()) ov.route = route;
  if (cmd->count("--seed")) ov.seed = seed;

  try {
    if (cmd == selftest) {
      std::optional<fs::path> dir;
      if (!out_path.empty()) dir = out_path;
      return cmd_selftest(ov, dir, out) ? kOk : kAcceptanceFailure;
    }
    const ExperimentConfig cfg = load_config(config_path);
    const fs::path dir = out_path.empty() ? fs::path(cfg.out_dir) : fs::path(out_path);
    if (cmd == simulate) cmd_simulate(cfg, ov, dir, out);
    else if (cmd == spectrum) cmd_spectrum(cfg, dir, out);
    else if (cmd == observe) cmd_observability(cfg, ov, dir, out);
    else cmd_invert(cfg, ov, dir, out);
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ExpressionError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace fwave::cli
