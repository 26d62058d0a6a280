#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "expression.hpp"
#include "fwave/uniqueness.hpp"

namespace fwave::cli {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kSchema = {
    {"problem",
     {"dim", "domain", "nodes", "a11", "a12", "a22", "b1", "b2", "c", "matrix", "alpha", "T", "K",
      "a", "b"}},
    {"spectral", {"cluster_tol", "contour_nodes"}},
    {"solver", {"route", "contour_nodes", "output_times", "output_count"}},
    {"observation",
     {"box", "nodes", "times", "time_count", "final_time", "route", "timestep_steps", "precision",
      "rank_tol"}},
    {"inversion", {"regularization", "lambda", "truncation", "noise", "seed"}},
    {"output", {"dir"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Reads the tree and remembers where each key was written.
class Reader {
 public:
  Reader(const std::string& text, std::string origin) : origin_(std::move(origin)) {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(origin_ + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    index_lines(text);
    for (const auto& [section, keys] : tree_) {
      const auto schema = kSchema.find(section);
      if (keys.empty() && !keys.data().empty()) {
        throw ConfigError(where(section, "") + "key '" + section + "' outside a section");
      }
      if (schema == kSchema.end()) throw ConfigError(where(section, "") + "unknown section [" + section + "]");
      for (const auto& kv : keys) {
        if (!schema->second.count(kv.first)) {
          throw ConfigError(where(section, kv.first) + "unknown key '" + kv.first + "' in [" +
                            section + "]");
        }
      }
    }
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
    if (!v) return std::nullopt;
    std::string s = *v;
    const auto comment = s.find_first_of(";#");
    if (comment != std::string::npos) s = s.substr(0, comment);
    return trim(s);
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const {
    throw ConfigError(where(section, key) + section + "." + key + ": " + what);
  }

  template <typename T>
  void get(const std::string& section, const std::string& key, T& out) const {
    const auto s = raw(section, key);
    if (!s) return;
    std::istringstream in(*s);
    T v{};
    if (!(in >> v) || !(in >> std::ws).eof()) fail(section, key, "cannot parse '" + *s + "'");
    out = v;
  }

  template <typename T>
  void get(const std::string& section, const std::string& key, std::optional<T>& out) const {
    if (!raw(section, key)) return;
    T v{};
    get(section, key, v);
    out = v;
  }

  void get(const std::string& section, const std::string& key, std::string& out) const {
    if (const auto s = raw(section, key)) out = *s;
  }

  template <typename T>
  void get(const std::string& section, const std::string& key, std::vector<T>& out) const {
    const auto s = raw(section, key);
    if (!s) return;
    std::istringstream in(*s);
    std::vector<T> v;
    T x{};
    while (in >> x) v.push_back(x);
    if (!in.eof()) fail(section, key, "cannot parse list '" + *s + "'");
    out = std::move(v);
  }

  std::string where(const std::string& section, const std::string& key) const {
    const auto it = lines_.find(section + "." + key);
    return origin_ + (it == lines_.end() ? "" : ":" + std::to_string(it->second)) + ": ";
  }

 private:
  void index_lines(const std::string& text) {
    std::istringstream in(text);
    std::string line, section;
    for (int n = 1; std::getline(in, line); ++n) {
      line = trim(line);
      if (line.empty() || line[0] == ';' || line[0] == '#') continue;
      if (line[0] == '[') {
        section = trim(line.substr(1, line.find(']') - 1));
        // Empty sections never reach the tree; check names here.
        if (!kSchema.count(section)) {
          throw ConfigError(origin_ + ":" + std::to_string(n) + ": unknown section [" + section + "]");
        }
        lines_.emplace(section + ".", n);
        continue;
      }
      const auto eq = line.find('=');
      lines_.emplace((section.empty() ? "" : section + ".") + trim(line.substr(0, eq)), n);
    }
  }

  std::string origin_;
  pt::ptree tree_;
  std::map<std::string, int> lines_;
};

void require(bool ok, const Reader& r, const std::string& section, const std::string& key,
             const std::string& what) {
  if (!ok) r.fail(section, key, what);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  const Reader r(text, origin);
  ExperimentConfig c;
  c.origin = origin;

  ProblemConfig& p = c.problem;
  r.get("problem", "dim", p.dim);
  require(p.dim == 1 || p.dim == 2, r, "problem", "dim", "must be 1 or 2");
  if (p.dim == 2) {
    p.domain = {0.0, 1.0, 0.0, 1.0};
    p.nodes = {8, 8};
    c.observation.box = {0.0, 0.25, 0.0, 1.0};
  }
  r.get("problem", "domain", p.domain);
  require(p.domain.size() == static_cast<std::size_t>(2 * p.dim), r, "problem", "domain",
          "needs " + std::to_string(2 * p.dim) + " numbers");
  for (int d = 0; d < p.dim; ++d) {
    require(p.domain[2 * d] < p.domain[2 * d + 1], r, "problem", "domain", "empty interval");
  }
  r.get("problem", "nodes", p.nodes);
  require(p.nodes.size() == static_cast<std::size_t>(p.dim), r, "problem", "nodes",
          "needs " + std::to_string(p.dim) + " counts");
  for (int n : p.nodes) require(n >= 1, r, "problem", "nodes", "mesh has no interior nodes");
  for (auto [key, field] : {std::pair{"a11", &p.a11}, {"a12", &p.a12}, {"a22", &p.a22},
                            {"b1", &p.b1}, {"b2", &p.b2}, {"c", &p.c}}) {
    r.get("problem", key, *field);
  }
  r.get("problem", "matrix", p.matrix);
  r.get("problem", "alpha", p.alpha);
  require(p.alpha > 1.0 && p.alpha < 2.0, r, "problem", "alpha", "must lie in (1, 2)");
  r.get("problem", "T", p.final_time);
  require(p.final_time > 0.0, r, "problem", "T", "must be positive");
  r.get("problem", "K", p.steps);
  require(p.steps >= 1, r, "problem", "K", "must be at least 1");
  r.get("problem", "a", p.a);
  r.get("problem", "b", p.b);
  // Surface expression and matrix errors at load time, with their line.
  if (p.matrix.empty()) {
    for (auto [key, text] : {std::pair{"a11", &p.a11}, {"a12", &p.a12}, {"a22", &p.a22},
                             {"b1", &p.b1}, {"b2", &p.b2}, {"c", &p.c}, {"a", &p.a}, {"b", &p.b}}) {
      try {
        Expression{*text};
      } catch (const ExpressionError& e) {
        r.fail("problem", key, e.what());
      }
    }
  }
  try {
    build_problem(p);
  } catch (const ExpressionError& e) {
    throw ConfigError(r.where("problem", "") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.where("problem", "") + "problem: " + e.what());
  }

  r.get("spectral", "cluster_tol", c.spectral.cluster_tol);
  r.get("spectral", "contour_nodes", c.spectral.contour_nodes);
  require(c.spectral.contour_nodes >= 4, r, "spectral", "contour_nodes", "must be at least 4");
  if (c.spectral.cluster_tol) {
    require(*c.spectral.cluster_tol > 0.0, r, "spectral", "cluster_tol", "must be positive");
  }

  SolverConfig& s = c.solver;
  r.get("solver", "route", s.route);
  require(s.route == "all" || s.route == "timestep" || s.route == "resolvent" ||
              s.route == "spectral",
          r, "solver", "route", "expected timestep, resolvent, spectral or all");
  r.get("solver", "contour_nodes", s.contour_nodes);
  require(s.contour_nodes >= 4 && s.contour_nodes % 2 == 0, r, "solver", "contour_nodes",
          "must be even and at least 4");
  r.get("solver", "output_times", s.output_times);
  r.get("solver", "output_count", s.output_count);
  require(s.output_count >= 1 && s.output_count <= p.steps, r, "solver", "output_count",
          "must lie in [1, K]");
  for (std::size_t i = 0; i < s.output_times.size(); ++i) {
    require(s.output_times[i] > 0.0 && s.output_times[i] <= p.final_time &&
                (i == 0 || s.output_times[i] > s.output_times[i - 1]),
            r, "solver", "output_times", "must be increasing and inside (0, T]");
  }

  ObservationConfig& o = c.observation;
  r.get("observation", "box", o.box);
  require(o.box.size() == static_cast<std::size_t>(2 * p.dim), r, "observation", "box",
          "needs " + std::to_string(2 * p.dim) + " numbers");
  r.get("observation", "nodes", o.nodes);
  r.get("observation", "times", o.times);
  r.get("observation", "time_count", o.time_count);
  require(o.time_count >= 1, r, "observation", "time_count", "must be positive");
  r.get("observation", "final_time", o.final_time);
  if (o.final_time) require(*o.final_time > 0.0, r, "observation", "final_time", "must be positive");
  r.get("observation", "route", o.route);
  require(o.route == "timestep" || o.route == "resolvent" || o.route == "spectral", r,
          "observation", "route", "expected timestep, resolvent or spectral");
  r.get("observation", "timestep_steps", o.timestep_steps);
  require(o.timestep_steps >= 1, r, "observation", "timestep_steps", "must be positive");
  r.get("observation", "precision", o.precision);
  require(o.precision == "double" || o.precision == "extended", r, "observation", "precision",
          "expected double or extended");
  r.get("observation", "rank_tol", o.rank_tol);

  InversionConfig& v = c.inversion;
  r.get("inversion", "regularization", v.regularization);
  require(v.regularization == "tikhonov" || v.regularization == "tsvd", r, "inversion",
          "regularization", "expected tikhonov or tsvd");
  r.get("inversion", "lambda", v.lambda);
  require(v.lambda >= 0.0, r, "inversion", "lambda", "must be non-negative");
  r.get("inversion", "truncation", v.truncation);
  r.get("inversion", "noise", v.noise);
  require(v.noise >= 0.0, r, "inversion", "noise", "must be non-negative");
  r.get("inversion", "seed", v.seed);

  r.get("output", "dir", c.out_dir);

  // Resolve observation nodes now so that an empty box is a config error.
  if (!p.matrix.empty() && o.nodes.empty()) return c;
  try {
    const Problem prob = build_problem(p);
    const int n = static_cast<int>(prob.a_op.rows());
    for (int i : observation_nodes(o, prob)) {
      require(i >= 0 && i < n, r, "observation", "nodes", "index out of range");
    }
    ObservationSetup probe;
    probe.omega = observation_nodes(o, prob);
    probe.times = observation_times(o, p.final_time);
    probe.validate(n);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.where("observation", "") + "observation: " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  const ProblemConfig& p = problem;
  j["problem"] = {{"dim", p.dim},   {"domain", p.domain}, {"nodes", p.nodes}, {"a11", p.a11},
                  {"a12", p.a12},   {"a22", p.a22},       {"b1", p.b1},       {"b2", p.b2},
                  {"c", p.c},       {"matrix", p.matrix}, {"alpha", p.alpha}, {"T", p.final_time},
                  {"K", p.steps},   {"a", p.a},           {"b", p.b}};
  j["spectral"] = {{"cluster_tol", spectral.cluster_tol ? nlohmann::ordered_json(*spectral.cluster_tol)
                                                        : nlohmann::ordered_json("auto")},
                   {"contour_nodes", spectral.contour_nodes}};
  j["solver"] = {{"route", solver.route},
                 {"contour_nodes", solver.contour_nodes},
                 {"output_times", solver.output_times},
                 {"output_count", solver.output_count}};
  const ObservationConfig& o = observation;
  j["observation"] = {{"box", o.box},
                      {"nodes", o.nodes},
                      {"times", o.times},
                      {"time_count", o.time_count},
                      {"final_time", o.final_time ? *o.final_time : p.final_time},
                      {"route", o.route},
                      {"timestep_steps", o.timestep_steps},
                      {"precision", o.precision},
                      {"rank_tol", o.rank_tol ? nlohmann::ordered_json(*o.rank_tol)
                                              : nlohmann::ordered_json("max(m, n) * eps")}};
  j["inversion"] = {{"regularization", inversion.regularization},
                    {"lambda", inversion.lambda},
                    {"truncation", inversion.truncation},
                    {"noise", inversion.noise},
                    {"seed", inversion.seed ? nlohmann::ordered_json(*inversion.seed)
                                            : nlohmann::ordered_json(nullptr)}};
  j["output"] = {{"dir", out_dir}};
  return j;
}

namespace {

Eigen::MatrixXd parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string row;
  while (std::getline(in, row, '|')) {
    std::istringstream rs(row);
    std::vector<double> values;
    double v;
    while (rs >> v) values.push_back(v);
    if (!rs.eof()) throw std::invalid_argument("matrix: cannot parse row '" + trim(row) + "'");
    if (!values.empty()) rows.push_back(std::move(values));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw std::invalid_argument("matrix: empty");
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) throw std::invalid_argument("matrix: must be square");
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Eigen::VectorXd parse_vector(const std::string& text, int n, const char* name) {
  std::istringstream in(text);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (!in.eof()) {
    throw std::invalid_argument(std::string(name) +
                                ": with an explicit matrix, give numbers (one or N)");
  }
  if (values.size() == 1) return Eigen::VectorXd::Constant(n, values[0]);
  if (static_cast<int>(values.size()) != n) {
    throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(n) + " values");
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), n);
}

}  // namespace

Problem build_problem(const ProblemConfig& cfg) {
  Problem p;
  if (!cfg.matrix.empty()) {
    // Rows separated by '|' (';' starts a comment in INI values).
    p.a_op = parse_matrix(cfg.matrix);
    const int n = static_cast<int>(p.a_op.rows());
    p.data = {parse_vector(cfg.a, n, "a"), parse_vector(cfg.b, n, "b")};
    return p;
  }
  const Mesh mesh = cfg.dim == 1
                        ? Mesh::interval(cfg.domain[0], cfg.domain[1], cfg.nodes[0])
                        : Mesh::rectangle(cfg.domain[0], cfg.domain[1], cfg.domain[2],
                                          cfg.domain[3], cfg.nodes[0], cfg.nodes[1]);
  if (mesh.dofs() > kMaxDenseDofs) throw std::invalid_argument("too many nodes for dense storage");
  const Expression a11(cfg.a11), a12(cfg.a12), a22(cfg.a22), b1(cfg.b1), b2(cfg.b2), c(cfg.c);
  const CoefficientField coeffs = CoefficientField::sample(mesh, a11, a12, a22, b1, b2, c,
                                                           "a11=" + cfg.a11 + " b1=" + cfg.b1);
  p.a_op = assemble(mesh, coeffs).matrix();
  const Expression a(cfg.a), b(cfg.b);
  const int n = mesh.dofs();
  p.data = {Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const auto x = mesh.point(i);
    p.data.a[i] = a(x[0], x[1]);
    p.data.b[i] = b(x[0], x[1]);
  }
  p.data.validate(n);
  p.mesh = mesh;
  return p;
}

std::vector<int> observation_nodes(const ObservationConfig& cfg, const Problem& p) {
  if (!cfg.nodes.empty()) return cfg.nodes;
  if (!p.mesh) throw std::invalid_argument("an explicit matrix needs observation.nodes");
  const Box box = p.mesh->dim() == 1 ? Box::interval(cfg.box[0], cfg.box[1])
                                     : Box::rectangle(cfg.box[0], cfg.box[1], cfg.box[2], cfg.box[3]);
  return subdomain_indices(*p.mesh, box);
}

std::vector<double> observation_times(const ObservationConfig& cfg, double problem_t) {
  if (!cfg.times.empty()) return cfg.times;
  const double t = cfg.final_time.value_or(problem_t);
  std::vector<double> out;
  for (int k = 1; k <= cfg.time_count; ++k) out.push_back(t * k / cfg.time_count);
  return out;
}

}  // namespace fwave::cli
