#include "tandem/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tandem/boxma.hpp"
#include "tandem/chain.hpp"
#include "tandem/heavytail.hpp"
#include "tandem/kappa.hpp"
#include "tandem/limits.hpp"
#include "tandem/numerics.hpp"
#include "tandem/stats.hpp"
#include "tandem/tandemsim.hpp"

#ifndef TANDEM_VERSION
#define TANDEM_VERSION "0.0.0"
#endif

namespace tandem {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kind_table() {
  static const std::vector<std::pair<ExperimentKind, std::string>> table = {
      {ExperimentKind::SolveM, "solve-m"},
      {ExperimentKind::SolveKappa, "solve-kappa"},
      {ExperimentKind::Phi, "phi"},
      {ExperimentKind::SimulateDes, "simulate-des"},
      {ExperimentKind::SimulateChain, "simulate-chain"},
      {ExperimentKind::Theorem1, "theorem1"},
      {ExperimentKind::Theorem2, "theorem2"},
      {ExperimentKind::SteadyState, "steady-state"},
      {ExperimentKind::Verify, "verify"},
  };
  return table;
}

// Kinds that run at a fixed arrival rate; the others live at the limit
// rate 1 / E[V].
bool fixed_rate(ExperimentKind kind) {
  return kind == ExperimentKind::SolveM || kind == ExperimentKind::SimulateDes ||
         kind == ExperimentKind::SteadyState;
}

bool uses_n_grid(const ExperimentSpec& s) {
  switch (s.kind) {
    case ExperimentKind::SimulateChain:
    case ExperimentKind::Theorem1:
    case ExperimentKind::Theorem2:
      return true;
    case ExperimentKind::SteadyState:
      return s.gamma > 0.0;
    case ExperimentKind::Verify:
      return s.checks.empty() ||
             std::find(s.checks.begin(), s.checks.end(), "discrete-generator") != s.checks.end();
    default:
      return false;
  }
}

std::string index_path(const std::string& field, std::size_t i) {
  return field + "[" + std::to_string(i) + "]";
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

std::uint64_t as_count(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x < 1.8e19 && x == std::floor(x)) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(path, "expected a non-negative integer");
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], index_path(path, i)));
  return out;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

using FieldSetter = std::function<void(ExperimentSpec&, const json&, const std::string&)>;

const std::map<std::string, FieldSetter>& field_setters() {
  static const std::map<std::string, FieldSetter> setters = {
      {"kind", [](ExperimentSpec&, const json&, const std::string&) {}},  // handled first
      {"profile",
       [](ExperimentSpec& s, const json& v, const std::string& p) {
         const auto prof = parse_profile(as_string(v, p));
         if (!prof) throw ConfigError(p, "expected \"fast\" or \"full\"");
         s.profile = *prof;
       }},
      {"nu", [](ExperimentSpec& s, const json& v, const std::string& p) { s.nu = as_number(v, p); }},
      {"b", [](ExperimentSpec& s, const json& v, const std::string& p) { s.b = as_number(v, p); }},
      {"gamma",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.gamma = as_number(v, p); }},
      {"lambda",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.lambda = as_number(v, p); }},
      {"rho", [](ExperimentSpec& s, const json& v, const std::string& p) { s.rho = as_number(v, p); }},
      {"n_grid",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.n_grid = as_numbers(v, p); }},
      {"n", [](ExperimentSpec& s, const json& v, const std::string& p) { s.n = as_number(v, p); }},
      {"t", [](ExperimentSpec& s, const json& v, const std::string& p) { s.t = as_number(v, p); }},
      {"t_grid",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.t_grid = as_numbers(v, p); }},
      {"x0", [](ExperimentSpec& s, const json& v, const std::string& p) { s.x0 = as_number(v, p); }},
      {"x_grid",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.x_grid = as_numbers(v, p); }},
      {"y_grid",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.y_grid = as_numbers(v, p); }},
      {"grid_points",
       [](ExperimentSpec& s, const json& v, const std::string& p) {
         s.grid_points = static_cast<std::size_t>(as_count(v, p));
       }},
      {"w_max",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.w_max = as_number(v, p); }},
      {"shift",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.shift = as_number(v, p); }},
      {"c", [](ExperimentSpec& s, const json& v, const std::string& p) { s.c = as_number(v, p); }},
      {"busy_periods",
       [](ExperimentSpec& s, const json& v, const std::string& p) {
         s.busy_periods = static_cast<std::size_t>(as_count(v, p));
       }},
      {"steps",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.steps = as_count(v, p); }},
      {"burn_in",
       [](ExperimentSpec& s, const json& v, const std::string& p) { s.burn_in = as_count(v, p); }},
      {"reps",
       [](ExperimentSpec& s, const json& v, const std::string& p) {
         s.reps = static_cast<std::size_t>(as_count(v, p));
       }},
      {"draws",
       [](ExperimentSpec& s, const json& v, const std::string& p) {
         s.draws = static_cast<std::size_t>(as_count(v, p));
       }},
      {"seed", [](ExperimentSpec& s, const json& v, const std::string& p) { s.seed = as_count(v, p); }},
      {"threads",
       [](ExperimentSpec& s, const json& v, const std::string& p) {
         const auto n = as_count(v, p);
         if (n > 4096) throw ConfigError(p, "at most 4096 threads");
         s.threads = static_cast<unsigned>(n);
       }},
      {"checks",
       [](ExperimentSpec& s, const json& v, const std::string& p) {
         if (!v.is_array()) throw ConfigError(p, "expected an array of check names");
         s.checks.clear();
         for (std::size_t i = 0; i < v.size(); ++i) s.checks.push_back(as_string(v[i], index_path(p, i)));
       }},
      {"keep_events",
       [](ExperimentSpec& s, const json& v, const std::string& p) {
         if (!v.is_boolean()) throw ConfigError(p, "expected true or false");
         s.keep_events = v.get<bool>();
       }},
      {"out", [](ExperimentSpec& s, const json& v, const std::string& p) { s.out = as_string(v, p); }},
  };
  return setters;
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void check_grid(const std::vector<double>& grid, const std::string& field, double lo, bool open,
                bool increasing) {
  require(!grid.empty(), field, "must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool in_range = open ? grid[i] > lo : grid[i] >= lo;
    require(in_range, index_path(field, i),
            std::string("must be ") + (open ? "> " : ">= ") + std::to_string(lo));
    if (increasing && i > 0) {
      require(grid[i] > grid[i - 1], index_path(field, i), "grid must be strictly increasing");
    }
  }
}

ServiceDistribution service_of(const ExperimentSpec& s) { return ServiceDistribution(s.nu, s.b); }

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kind_table()) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(const std::string& name) {
  for (const auto& [k, n] : kind_table()) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : kind_table()) out.push_back(entry.second);
    return out;
  }();
  return names;
}

std::string to_string(Profile profile) { return profile == Profile::Fast ? "fast" : "full"; }

std::optional<Profile> parse_profile(const std::string& name) {
  if (name == "fast") return Profile::Fast;
  if (name == "full") return Profile::Full;
  return std::nullopt;
}

const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names = {"semigroup", "generator", "discrete-generator",
                                                 "max-convolution", "iterates"};
  return names;
}

// ---------------------------------------------------------------------------
// ExperimentSpec

ExperimentSpec ExperimentSpec::from_json(const json& doc, std::optional<ExperimentKind> kind) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  ExperimentSpec spec;
  std::optional<ExperimentKind> doc_kind;
  if (doc.contains("kind")) {
    const std::string name = as_string(doc["kind"], "kind");
    doc_kind = parse_kind(name);
    if (!doc_kind) throw ConfigError("kind", "unknown kind \"" + name + "\"");
  }
  if (kind && doc_kind && *kind != *doc_kind) {
    throw ConfigError("kind", "configuration says \"" + to_string(*doc_kind) +
                                  "\" but \"" + to_string(*kind) + "\" was requested");
  }
  if (!kind && !doc_kind) throw ConfigError("kind", "missing");
  spec.kind = kind ? *kind : *doc_kind;

  const auto& setters = field_setters();
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const auto found = setters.find(it.key());
    if (found == setters.end()) throw ConfigError(it.key(), "unknown field");
    found->second(spec, it.value(), it.key());
  }
  return spec;
}

ExperimentSpec ExperimentSpec::from_file(const std::string& path,
                                         std::optional<ExperimentKind> kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open configuration file " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path + ": " + e.what());
  }
  return from_json(doc, kind);
}

void ExperimentSpec::validate() const {
  try {
    check_tail_index(nu);
  } catch (const std::exception& e) {
    throw ConfigError("nu", e.what());
  }
  require(std::isfinite(b) && b > 0.0, "b", "must be finite and > 0");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma", "must be finite and >= 0");
  const ServiceDistribution dist = service_of(*this);

  if (fixed_rate(kind)) {
    require(!(lambda && rho), "lambda", "give either lambda or rho, not both");
    if (lambda) require(*lambda > 0.0, "lambda", "must be > 0");
    if (rho) require(*rho > 0.0, "rho", "must be > 0");
    const double load = resolved_lambda() * dist.mean();
    const std::string field = lambda ? "lambda" : "rho";
    if (kind == ExperimentKind::SolveM) {
      require(load <= 1.0, field, "load lambda E[V] = " + std::to_string(load) + " exceeds 1");
    } else {
      require(load < 1.0, field,
              "load lambda E[V] = " + std::to_string(load) + " must be < 1 for " + to_string(kind));
    }
  } else {
    require(!lambda, "lambda",
            "not used by " + to_string(kind) + "; the limit rate is fixed at 1/E[V]");
    require(!rho, "rho", "not used by " + to_string(kind) + "; the limit rate is fixed at 1/E[V]");
  }

  if (!n_grid.empty()) check_grid(n_grid, "n_grid", 1.0, false, true);
  if (uses_n_grid(*this)) {
    const auto grid = resolved_n_grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      try {
        schedule(dist, gamma, grid[i]);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(n_grid.empty() ? "gamma" : index_path("n_grid", i), e.what());
      }
    }
  }
  if (n) {
    require(*n >= 1.0, "n", "must be >= 1");
    try {
      schedule(dist, gamma, *n);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("n", e.what());
    }
  }
  require(std::isfinite(t) && t >= 0.0, "t", "must be finite and >= 0");
  if (!t_grid.empty()) check_grid(t_grid, "t_grid", 0.0, false, true);
  require(std::isfinite(x0) && x0 >= 0.0, "x0", "must be finite and >= 0");
  if (!x_grid.empty()) check_grid(x_grid, "x_grid", 0.0, false, true);
  if (!y_grid.empty()) check_grid(y_grid, "y_grid", 0.0, true, true);
  require(grid_points >= 2, "grid_points", "must be >= 2");
  if (w_max) require(*w_max > b, "w_max", "must exceed b");
  require(std::isfinite(shift), "shift", "must be finite");
  require(std::isfinite(c) && c > 0.0, "c", "must be finite and > 0");
  if (busy_periods) require(*busy_periods >= 1, "busy_periods", "must be >= 1");
  if (steps) require(*steps >= 1, "steps", "must be >= 1");
  if (reps) require(*reps >= 2, "reps", "must be >= 2");
  if (draws) require(*draws >= 2, "draws", "must be >= 2");

  if (!checks.empty()) {
    require(kind == ExperimentKind::Verify, "checks", "only used by verify");
    std::set<std::string> seen;
    const auto& names = verify_check_names();
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const auto field = index_path("checks", i);
      require(std::find(names.begin(), names.end(), checks[i]) != names.end(), field,
              "unknown check \"" + checks[i] + "\"");
      require(seen.insert(checks[i]).second, field, "listed twice");
    }
  }
  require(!keep_events || kind == ExperimentKind::SimulateDes, "keep_events",
          "only used by simulate-des");
  if (kind == ExperimentKind::Theorem2 && t > 0.0) {
    for (double nv : resolved_n_grid()) {
      require(scaled_steps(nv, t) >= 1, "t", "n t must be >= 1 for every n");
    }
  }
}

double ExperimentSpec::resolved_lambda() const {
  const double mean = service_of(*this).mean();
  if (!fixed_rate(kind)) return 1.0 / mean;
  if (lambda) return *lambda;
  return rho.value_or(0.9) / mean;
}

std::vector<double> ExperimentSpec::resolved_n_grid() const {
  return n_grid.empty() ? std::vector<double>{1e2, 1e3, 1e4} : n_grid;
}

std::size_t ExperimentSpec::resolved_busy_periods() const {
  if (busy_periods) return *busy_periods;
  if (keep_events) return profile == Profile::Full ? 10'000 : 1'000;
  return profile == Profile::Full ? 1'000'000 : 100'000;
}

std::uint64_t ExperimentSpec::resolved_steps() const {
  if (steps) return *steps;
  return profile == Profile::Full ? 1'000'000 : 200'000;
}

std::size_t ExperimentSpec::resolved_reps() const {
  if (reps) return *reps;
  return profile == Profile::Full ? 10'000 : 2'000;
}

std::size_t ExperimentSpec::resolved_draws() const {
  if (draws) return *draws;
  return profile == Profile::Full ? 100'000 : 20'000;
}

json ExperimentSpec::to_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["profile"] = to_string(profile);
  j["nu"] = nu;
  j["b"] = b;
  j["gamma"] = gamma;
  if (lambda) j["lambda"] = *lambda;
  if (rho) j["rho"] = *rho;
  j["lambda_resolved"] = resolved_lambda();
  j["n_grid"] = resolved_n_grid();
  if (n) j["n"] = *n;
  j["t"] = t;
  if (!t_grid.empty()) j["t_grid"] = t_grid;
  j["x0"] = x0;
  if (!x_grid.empty()) j["x_grid"] = x_grid;
  if (!y_grid.empty()) j["y_grid"] = y_grid;
  j["grid_points"] = grid_points;
  j["w_max"] = resolved_w_max();
  j["shift"] = shift;
  j["c"] = c;
  j["busy_periods"] = resolved_busy_periods();
  j["steps"] = resolved_steps();
  j["burn_in"] = burn_in.value_or(0);
  j["reps"] = resolved_reps();
  j["draws"] = resolved_draws();
  j["seed"] = seed;
  j["threads"] = threads;
  if (!checks.empty()) j["checks"] = checks;
  j["keep_events"] = keep_events;
  return j;
}

// ---------------------------------------------------------------------------
// Table and report

void Table::add_row(std::initializer_list<double> row) { add_row(std::vector<double>(row)); }

void Table::add_row(const std::vector<double>& row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("table " + name + ": row has " + std::to_string(row.size()) +
                           " values for " + std::to_string(columns.size()) + " columns");
  }
  data.insert(data.end(), row.begin(), row.end());
}

std::vector<double> Table::column(const std::string& col) const {
  const auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end()) throw std::out_of_range("table " + name + " has no column " + col);
  const std::size_t j = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, j);
  return out;
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out += ',';
    out += columns[j];
  }
  out += '\n';
  char buf[32];
  const std::size_t width = columns.size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", data[i]);
    out += buf;
    out += (i % width == width - 1) ? '\n' : ',';
  }
  return out;
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* RunReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const Table* RunReport::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

json RunReport::to_json() const {
  json j;
  j["version"] = version;
  j["spec"] = spec.to_json();
  j["passed"] = passed();
  j["checks"] = json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"statistic", c.statistic},
                           {"relation", c.relation},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass},
                           {"detail", c.detail}});
  }
  j["tables"] = json::array();
  for (const auto& t : tables) j["tables"].push_back({{"name", t.name}, {"rows", t.rows()}});
  j["notes"] = notes;
  j["seconds"] = seconds;
  return j;
}

std::vector<std::string> write_outputs(const RunReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& t : report.tables) {
    const fs::path path = fs::path(dir) / (t.name + ".csv");
    std::ofstream out(path, std::ios::binary);
    out << t.to_csv();
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path.string());
  }
  const fs::path path = fs::path(dir) / "report.json";
  std::ofstream out(path, std::ios::binary);
  out << report.to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
  written.push_back(path.string());
  return written;
}

std::string version_string() { return TANDEM_VERSION; }

// ---------------------------------------------------------------------------
// Experiments

namespace {

struct Context {
  const ExperimentSpec& spec;
  RunReport& report;
  ServiceDistribution dist;

  // KS tolerances are stated for a reference sample size. Smaller runs are
  // not asked for more than the 99% critical value 1.63 / sqrt(effective
  // size) allows; `pooled` turns two samples of size n into n / 2.
  static double ks_tolerance(double stated, double size, double reference, bool pooled = false) {
    if (size >= reference) return stated;
    const double effective = pooled ? size / 2.0 : size;
    return std::max(stated, 1.63 / std::sqrt(effective));
  }

  CheckResult& add(std::string name, double statistic, double tolerance, std::string relation,
                   json detail = json::object()) {
    CheckResult c;
    c.name = std::move(name);
    c.statistic = statistic;
    c.tolerance = tolerance;
    c.relation = std::move(relation);
    if (c.relation == "<=") {
      c.pass = statistic <= tolerance;
    } else if (c.relation == "<") {
      c.pass = statistic < tolerance;
    } else if (c.relation == ">") {
      c.pass = statistic > tolerance;
    } else if (c.relation == ">=") {
      c.pass = statistic >= tolerance;
    } else {
      throw std::logic_error("unknown relation " + c.relation);
    }
    c.detail = std::move(detail);
    report.checks.push_back(std::move(c));
    return report.checks.back();
  }

  Table& table(std::string name, std::vector<std::string> columns) {
    report.tables.push_back(Table{std::move(name), std::move(columns), {}});
    return report.tables.back();
  }
};

std::string n_label(double n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", n);
  return buf;
}

// Count of i with v[i+1] >= v[i] (for strict decrease).
std::size_t non_decreasing_steps(const std::vector<double>& v) {
  std::size_t bad = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) ++bad;
  }
  return bad;
}

// ---- solve-m

void run_solve_m(Context& ctx) {
  const auto& s = ctx.spec;
  const double lambda = s.resolved_lambda();
  const GridSpec grid{s.b, s.resolved_w_max(), s.grid_points};
  const MaxServiceCdf table = tabulate(lambda, ctx.dist, grid, s.threads);
  Table& out = ctx.table("solve_m", {"w", "m", "residual"});
  const auto m = table.m_values();
  std::size_t drops = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    out.add_row({table.grid()[i], m[i], table.residuals()[i]});
    if (i && m[i] < m[i - 1]) ++drops;
  }
  ctx.add("residual", table.max_abs_residual(), 1e-10, "<=",
          {{"points", m.size()}, {"lambda", lambda}, {"rho", lambda * ctx.dist.mean()}});
  ctx.add("monotone", static_cast<double>(drops), 0.0, "<=");
  ctx.report.notes.push_back("tail exponent of the extension beyond w_max: " +
                             std::to_string(table.tail_exponent()));
}

// ---- solve-kappa

void run_solve_kappa(Context& ctx) {
  const auto& s = ctx.spec;
  const KappaParams p = KappaParams::from_service(ctx.dist, s.gamma);
  const auto ys = s.y_grid.empty() ? numerics::log_space(1e-3, 1e6, 91) : s.y_grid;
  const double bound = kappa_upper_bound(p);
  Table& out = ctx.table("solve_kappa", {"y", "kappa", "residual"});
  std::vector<double> ks(ys.size());
  double worst_residual = 0.0;
  std::size_t shape_violations = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    ks[i] = solve_kappa(p, ys[i]);
    const double r = kappa_equation(p, ys[i], ks[i]);
    worst_residual = std::max(worst_residual, std::fabs(r));
    out.add_row({ys[i], ks[i], r});
    // H is strictly decreasing in k with a single sign change on (0, bound].
    double prev = kappa_equation(p, ys[i], bound * 1e-6);
    int changes = 0;
    for (double k : numerics::log_space(bound * 1e-6, bound, 64)) {
      const double h = kappa_equation(p, ys[i], k);
      if (k > bound * 1e-6 && !(h < prev)) ++shape_violations;
      if ((h > 0.0) != (prev > 0.0)) ++changes;
      prev = h;
    }
    if (changes != 1) ++shape_violations;
  }
  const auto [lo, hi] = std::minmax_element(ks.begin(), ks.end());
  ctx.add("residual", worst_residual, 1e-10, "<=", {{"points", ys.size()}});
  ctx.add("upper_bound", *hi, bound, "<=");
  ctx.add("positive", *lo, 0.0, ">");
  ctx.add("unique_root", static_cast<double>(shape_violations), 0.0, "<=");
  if (s.gamma == 0.0) {
    ctx.add("constant", *hi - *lo, 1e-10, "<=", {{"kappa0", *lo}});
  } else {
    const KappaFunction kf(p, {}, s.threads);
    const double slope = regular_variation_exponent(kf, 1e3, 1e5);
    ctx.add("regular_variation", std::fabs(slope - (1.0 - s.nu)), 0.05, "<=",
            {{"slope", slope}, {"index", 1.0 - s.nu}, {"y_range", {1e3, 1e5}}});
  }
}

// ---- phi

void run_phi(Context& ctx) {
  const auto& s = ctx.spec;
  const KappaParams p = KappaParams::from_service(ctx.dist, s.gamma);
  const LimitCdf cdf{KappaFunction(p, {}, s.threads)};
  const double lambda = cdf.lambda();
  const auto ts = s.t_grid.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0} : s.t_grid;
  const auto xs = s.x_grid.empty() ? numerics::log_space(1e-3, 1e2, 51) : s.x_grid;
  Table& out = ctx.table("phi", {"t", "x", "phi"});
  std::size_t x_violations = 0;
  std::size_t t_violations = 0;
  std::vector<double> prev_t;
  for (double t : ts) {
    std::vector<double> row;
    double prev_c = INFINITY;
    for (double x : xs) {
      const double v = cdf.phi(t, x);
      row.push_back(v);
      out.add_row({t, x, v});
      if (t > 0.0 && x > 0.0) {
        const double comp = cdf.phi_complement(t, x);
        if (!(comp < prev_c)) ++x_violations;
        prev_c = comp;
      }
    }
    if (!prev_t.empty()) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] > prev_t[i]) ++t_violations;
      }
    }
    prev_t = std::move(row);
  }
  ctx.add("increasing_in_x", static_cast<double>(x_violations), 0.0, "<=");
  ctx.add("nonincreasing_in_t", static_cast<double>(t_violations), 0.0, "<=");
  double factor_err = 0.0;
  for (double a : ts) {
    for (double bb : ts) {
      for (double x : xs) {
        if (x <= 0.0) continue;
        const double lhs = cdf.phi(bb, x + a / lambda) * cdf.phi(a, x);
        factor_err = std::max(factor_err, std::fabs(lhs - cdf.phi(a + bb, x)));
      }
    }
  }
  ctx.add("factorization", factor_err, 1e-8, "<=");
  if (s.gamma == 0.0) {
    // (1 + t/(x lambda))^(-lambda kappa0) against the quadrature route.
    const double k0 = cdf.kappa().at_zero();
    double err = 0.0;
    for (double t : ts) {
      for (double x : xs) {
        if (x <= 0.0 || t <= 0.0) continue;
        const double closed = std::pow(1.0 + t / (x * lambda), -lambda * k0);
        err = std::max(err, std::fabs(closed - cdf.phi_by_quadrature(t, x)));
      }
    }
    ctx.add("closed_form", err, 1e-8, "<=", {{"kappa0", k0}});
  }
}

// ---- simulate-des

void run_simulate_des(Context& ctx) {
  const auto& s = ctx.spec;
  const double lambda = s.resolved_lambda();
  const double rho = lambda * ctx.dist.mean();
  const std::size_t periods = s.resolved_busy_periods();
  RandomStream rng(s.seed, 0);
  SimulationOptions options;
  options.keep_path = s.keep_events;
  const SimulationResult sim = simulate(lambda, ctx.dist, periods, rng, options);
  const auto& rec = sim.busy_periods;

  Table& out = ctx.table("des", {"k", "t_k", "t_tilde_k", "M_k", "I_k", "R_k"});
  out.data.reserve(rec.size() * 6);
  std::vector<double> maxima;
  std::vector<double> idles;
  std::vector<double> jobs;
  maxima.reserve(rec.size());
  idles.reserve(rec.size());
  jobs.reserve(rec.size());
  for (const auto& r : rec) {
    out.add_row({static_cast<double>(r.index), r.last_arrival, r.last_q2_arrival, r.max_service,
                 r.idle_after, r.r_value});
    maxima.push_back(r.max_service);
    idles.push_back(r.idle_after);
    jobs.push_back(static_cast<double>(r.jobs));
  }

  const RecursionReport recursion = verify_recursion(rec, 1e-9);
  json rdetail = {{"checked", recursion.checked}, {"max_rel_error", recursion.max_rel_error}};
  if (!recursion.violations.empty()) {
    const auto& v = recursion.violations.front();
    rdetail["first_violation"] = {{"n", v.n}, {"des", v.des_value}, {"formula", v.formula_value}};
  }
  ctx.add("recursion", static_cast<double>(recursion.violations.size()), 0.0, "<=", rdetail);

  const double size = static_cast<double>(rec.size());
  const MaxServiceCdf table =
      tabulate(lambda, ctx.dist, GridSpec{s.b, s.resolved_w_max(), s.grid_points}, s.threads);
  const EmpiricalDistribution m_ecdf(maxima);
  ctx.add("max_law_ks", ks_distance(m_ecdf, [&](double w) { return table.cdf(w); }),
          ctx.ks_tolerance(0.005, size, 1e6), "<", {{"busy_periods", rec.size()}, {"rho", rho}});

  const EmpiricalDistribution i_ecdf(idles);
  ctx.add("idle_ks", ks_distance(i_ecdf, [&](double x) { return -std::expm1(-lambda * x); }),
          ctx.ks_tolerance(0.01, size, 1e5), "<");
  const double corr = rank_correlation(maxima, idles);
  ctx.add("idle_independence", std::fabs(corr), std::max(0.01, 3.29 / std::sqrt(size)), "<",
          {{"rank_correlation", corr}});

  const MeanEstimate mj = mean_estimate(jobs);
  const double expected = 1.0 / (1.0 - rho);
  ctx.add("mean_jobs", std::fabs(mj.mean - expected) / mj.std_error, 3.0, "<=",
          {{"mean", mj.mean}, {"std_error", mj.std_error}, {"expected", expected}});

  if (sim.path) {
    const auto& path = *sim.path;
    Table& ev = ctx.table("events", {"time", "kind", "job", "w1", "w2"});
    ev.data.reserve(path.time.size() * 5);
    for (std::size_t e = 0; e < path.time.size(); ++e) {
      ev.add_row({path.time[e], path.kind[e] == EventKind::Arrival ? 0.0 : 1.0,
                  static_cast<double>(path.job[e]), path.w1[e], path.w2[e]});
    }
    const PathCheck wc = check_work_conservation(sim, 1e-9);
    ctx.add("work_conservation", wc.max_error, 1e-9, "<=", {{"events", wc.events}});
    const PathCheck ls = check_level_setting(sim, 1e-9);
    ctx.add("level_setting", ls.max_error, 1e-9, "<=", {{"events", ls.events}});
    const auto sojourn = q2_sojourn_max(rec, sim.jobs);
    double err = 0.0;
    for (std::size_t k = 0; k < rec.size(); ++k) {
      err = std::max(err, std::fabs(sojourn[k] - rec[k].r_value) / (1.0 + rec[k].r_value));
    }
    ctx.add("sojourn_max", err, 1e-9, "<=");
  }
}

// Limit law of X_n(t) from x0: max(x0 - t/lambda, Z_t). Returns (cdf, left limit).
std::pair<CdfFunction, CdfFunction> limit_law(const LimitCdf& cdf, double t, double x0) {
  if (t == 0.0) {
    return {[x0](double x) { return x >= x0 ? 1.0 : 0.0; },
            [x0](double x) { return x > x0 ? 1.0 : 0.0; }};
  }
  const double floor = std::max(x0 - t / cdf.lambda(), 0.0);
  return {[&cdf, t, floor](double x) { return x < floor || x <= 0.0 ? 0.0 : cdf.phi(t, x); },
          [&cdf, t, floor](double x) { return x <= floor ? 0.0 : cdf.phi(t, x); }};
}

struct ChainRun {
  HeavyTrafficSchedule schedule;
  std::vector<double> values;
};

ChainRun run_chain_at(Context& ctx, double n, std::size_t index) {
  const auto& s = ctx.spec;
  ChainRun out{schedule(ctx.dist, s.gamma, n), {}};
  const MaxServiceCdf table =
      tabulate(out.schedule.lambda_n, ctx.dist, chain_grid(out.schedule), s.threads);
  EnsembleSpec es;
  es.t = s.t;
  es.x0 = s.x0;
  es.reps = s.resolved_reps();
  es.seed = s.seed;
  es.stream_offset = static_cast<std::uint64_t>(index) << 32;
  es.threads = s.threads;
  out.values = run_scaled(kernel_of(out.schedule), tabulated_sampler(table), es);
  return out;
}

Table terminal_table(const std::string& stem, double n, const std::vector<double>& values) {
  Table t{stem + "_n" + n_label(n), {"rep", "terminal_value"}, {}};
  t.data.reserve(values.size() * 2);
  for (std::size_t r = 0; r < values.size(); ++r) t.add_row({static_cast<double>(r), values[r]});
  return t;
}

std::vector<double> probe_y_grid(const ExperimentSpec& s) {
  return s.y_grid.empty() ? std::vector<double>{0.5, 1.0, 2.0, 5.0} : s.y_grid;
}

// ---- simulate-chain

void run_simulate_chain(Context& ctx) {
  const auto& s = ctx.spec;
  const KappaParams p = KappaParams::from_service(ctx.dist, s.gamma);
  const LimitCdf cdf{KappaFunction(p, {}, s.threads)};
  const auto ns = s.resolved_n_grid();
  const auto ys = probe_y_grid(s);
  const auto [law, left] = limit_law(cdf, s.t, s.x0);
  Table probe{"probe", {"n", "y", "n_mbar_ny", "kappa_over_y", "abs_err"}, {}};
  std::vector<Table> terminals;
  std::vector<std::vector<double>> errors(ys.size());
  json ks = json::array();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const ChainRun runi = run_chain_at(ctx, ns[i], i);
    terminals.push_back(terminal_table("chain_terminal", ns[i], runi.values));
    ks.push_back({{"n", ns[i]}, {"ks", ks_distance(EmpiricalDistribution(runi.values), law, left)}});
    const auto values = scaled_max_cdf_probe(runi.schedule, ys);
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double ref = cdf.kappa().value(ys[j]) / ys[j];
      const double err = std::fabs(values[j] - ref);
      errors[j].push_back(err);
      probe.add_row({ns[i], ys[j], values[j], ref, err});
    }
  }
  ctx.report.tables.push_back(std::move(probe));
  for (auto& t : terminals) ctx.report.tables.push_back(std::move(t));
  std::size_t bad = 0;
  for (const auto& e : errors) bad += non_decreasing_steps(e);
  ctx.add("probe_decreasing", static_cast<double>(bad), 0.0, "<=", {{"ks_vs_limit", ks}});
}

// ---- theorem1

void run_theorem1(Context& ctx) {
  const auto& s = ctx.spec;
  const KappaParams p = KappaParams::from_service(ctx.dist, s.gamma);
  const KappaFunction kf(p, {}, s.threads);
  const auto ns = s.resolved_n_grid();
  const auto ys = probe_y_grid(s);
  Table& out = ctx.table("theorem1", {"n", "y", "n_mbar_ny", "kappa_over_y", "abs_err", "rel_err"});
  std::vector<std::vector<double>> errors(ys.size());
  double worst_scaled = 0.0;
  double least = INFINITY;
  double final_rel = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const HeavyTrafficSchedule sch = schedule(ctx.dist, s.gamma, ns[i]);
    const auto values = scaled_max_cdf_probe(sch, ys);
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double ref = kf.value(ys[j]) / ys[j];
      const double err = std::fabs(values[j] - ref);
      errors[j].push_back(err);
      out.add_row({ns[i], ys[j], values[j], ref, err, err / ref});
      worst_scaled = std::max(worst_scaled, ys[j] * values[j]);
      least = std::min(least, values[j]);
      if (i + 1 == ns.size()) final_rel = std::max(final_rel, err / ref);
    }
  }
  std::size_t bad = 0;
  for (const auto& e : errors) bad += non_decreasing_steps(e);
  ctx.add("decreasing", static_cast<double>(bad), 0.0, "<=");
  ctx.add("final_rel_err", final_rel, 0.05, "<", {{"n", ns.back()}});
  const double bound = std::max(std::pow(2.0, 2.0 / s.nu) * ctx.dist.mean(), 1.0);
  ctx.add("scaled_bound", worst_scaled, bound, "<=", {{"quantity", "y n mbar(n y)"}});
  ctx.add("positive", least, 0.0, ">");

  const HeavyTrafficSchedule last = schedule(ctx.dist, s.gamma, ns.back());
  const auto base = scaled_max_cdf_probe(last, ys);
  double shift_err = 0.0;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    for (double sh : {s.shift, -s.shift}) {
      shift_err = std::max(shift_err, std::fabs(shifted_probe(last, ys[j], sh) - base[j]) / base[j]);
    }
  }
  ctx.add("shift_invariance", shift_err, 0.01, "<", {{"shift", s.shift}, {"n", ns.back()}});
}

// ---- theorem2

void run_theorem2(Context& ctx) {
  const auto& s = ctx.spec;
  const KappaParams p = KappaParams::from_service(ctx.dist, s.gamma);
  const LimitCdf cdf{KappaFunction(p, {}, s.threads)};
  const auto ns = s.resolved_n_grid();
  const auto [law, left] = limit_law(cdf, s.t, s.x0);
  Table out{"theorem2", {"n", "ks", "support_bound"}, {}};
  std::vector<Table> terminals;
  std::vector<double> ks;
  json detail = json::array();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const ChainRun runi = run_chain_at(ctx, ns[i], i);
    terminals.push_back(terminal_table("theorem2_terminal", ns[i], runi.values));
    const double d = ks_distance(EmpiricalDistribution(runi.values), law, left);
    // Every busy-period maximum is at least b, so X_n(t) >= b/n once a step
    // has been taken and the statistic cannot fall below the limit mass there.
    const bool stepped = scaled_steps(ns[i], s.t) >= 1;
    const double bound = stepped && s.t > 0.0 ? law(s.b / ns[i]) : 0.0;
    ks.push_back(d);
    out.add_row({ns[i], d, bound});
    detail.push_back({{"n", ns[i]}, {"ks", d}, {"support_bound", bound}});
  }
  const double final_bound = out.data.back();
  ctx.report.tables.push_back(std::move(out));
  for (auto& t : terminals) ctx.report.tables.push_back(std::move(t));
  const double reps = static_cast<double>(s.resolved_reps());
  if (s.t == 0.0) {
    ctx.add("ks_degenerate", *std::max_element(ks.begin(), ks.end()), 0.0, "<=", detail);
  } else {
    ctx.add("ks_decreasing", static_cast<double>(non_decreasing_steps(ks)), 0.0, "<=", detail);
    ctx.add("ks_final", ks.back(), ctx.ks_tolerance(0.03, reps, 1e4), "<",
            {{"n", ns.back()}, {"reps", s.resolved_reps()}, {"support_bound", final_bound}});
  }
  if (s.gamma == 0.0 && s.t > 0.0) {
    const double k0 = cdf.kappa().at_zero();
    const double lambda = cdf.lambda();
    double err = 0.0;
    for (double x : numerics::log_space(1e-3, 1e2, 26)) {
      const double closed = std::pow(1.0 + s.t / (x * lambda), -lambda * k0);
      err = std::max(err, std::fabs(closed - cdf.phi_by_quadrature(s.t, x)));
    }
    ctx.add("closed_form", err, 1e-8, "<=", {{"kappa0", k0}});
  }
}

// ---- steady-state

void run_steady_state(Context& ctx) {
  const auto& s = ctx.spec;
  const double lambda = s.resolved_lambda();
  const double rho = lambda * ctx.dist.mean();
  const SteadyStateLaw law = steady_state_law(
      lambda, ctx.dist, GridSpec{s.b, s.resolved_w_max(), s.grid_points}, s.threads);
  LongRunSpec lr;
  lr.steps = s.resolved_steps();
  lr.burn_in = s.burn_in.value_or(0);
  lr.seed = s.seed;
  const auto values = run_long_chain(lambda, tabulated_sampler(law.maxcdf()), lr, rho);
  const EmpiricalDistribution ecdf(values);
  const double ks = ks_distance(ecdf, [&](double w) { return law.cdf(w); });

  Table& out = ctx.table("steady_state", {"w", "ecdf", "analytic"});
  for (double w : numerics::log_space(s.b, s.resolved_w_max(), s.grid_points)) {
    out.add_row({w, ecdf.cdf(w), law.cdf(w)});
  }
  const std::uint64_t burn = lr.burn_in ? lr.burn_in : default_burn_in(rho);
  ctx.add("chain_ks", ks, ctx.ks_tolerance(0.01, static_cast<double>(values.size()), 1e6), "<",
          {{"rho", rho}, {"steps", values.size()}, {"burn_in", burn},
           {"truncation_tail", law.truncation_tail()},
           {"tail_exponent", law.maxcdf().tail_exponent()}});
  const std::size_t half = values.size() / 2;
  const EmpiricalDistribution first(std::vector<double>(values.begin(), values.begin() + half));
  const EmpiricalDistribution second(std::vector<double>(values.begin() + half, values.end()));
  ctx.add("split_half_ks", ks_distance(first, second),
          ctx.ks_tolerance(0.005, static_cast<double>(half), 5e5, true), "<");

  if (s.gamma == 0.0) {
    ctx.report.notes.push_back(
        "interchange skipped: with gamma = 0 the limit law degenerates to 0 "
        "(the kappa/y integral diverges)");
    return;
  }
  const KappaParams p = KappaParams::from_service(ctx.dist, s.gamma);
  const LimitCdf cdf{KappaFunction(p, {}, s.threads)};
  const auto xs = s.x_grid.empty() ? numerics::log_space(0.05, 20.0, 40) : s.x_grid;
  Table& inter = ctx.table("interchange", {"n", "x", "scaled_cdf", "phi_infinity", "abs_err"});
  std::vector<double> sup;
  json detail = json::array();
  for (double n : s.resolved_n_grid()) {
    const HeavyTrafficSchedule sch = schedule(ctx.dist, s.gamma, n);
    const SteadyStateLaw scaled = steady_state_law(sch.lambda_n, ctx.dist, chain_grid(sch), s.threads);
    double worst = 0.0;
    for (double x : xs) {
      const double a = scaled.cdf(n * x);
      const double b = cdf.phi_infinity(x).value;
      worst = std::max(worst, std::fabs(a - b));
      inter.add_row({n, x, a, b, std::fabs(a - b)});
    }
    sup.push_back(worst);
    detail.push_back({{"n", n}, {"sup_error", worst}});
  }
  ctx.add("interchange_decreasing", static_cast<double>(non_decreasing_steps(sup)), 0.0, "<=",
          detail);
}

// ---- verify

void verify_semigroup(Context& ctx, const LimitCdf& cdf, const TestFunction& f) {
  const auto& s = ctx.spec;
  const double c = f.support();
  const double lambda = cdf.lambda();
  const auto xs = numerics::lin_space(0.0, 2.0 * c, 21);
  ctx.add("semigroup_property", semigroup_property(cdf, 0.5, 0.5, f, xs), 1e-6, "<=",
          {{"s", 0.5}, {"t", 0.5}});

  const auto ts = s.t_grid.empty() ? std::vector<double>{0.1, 0.5, 1.0, 2.0} : s.t_grid;
  const double sup_f = 1.0 / 16.0;
  Table& out = ctx.table("semigroup", {"t", "x", "Tf"});
  std::size_t contraction = 0;
  double outside = 0.0;
  for (double t : ts) {
    for (double x : xs) {
      const double v = semigroup_apply(cdf, t, f, x);
      out.add_row({t, x, v});
      if (v < 0.0 || v > sup_f * (1.0 + 1e-12)) ++contraction;
    }
    for (double x : {c + t / lambda, c + t / lambda + 1.0, 2.0 * (c + t / lambda)}) {
      outside = std::max(outside, std::fabs(semigroup_apply(cdf, t, f, x)));
    }
  }
  ctx.add("positive_contraction", static_cast<double>(contraction), 0.0, "<=");
  ctx.add("compact_support", outside, 1e-15, "<=");

  std::vector<double> drift;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    double worst = 0.0;
    for (double x : xs) worst = std::max(worst, std::fabs(semigroup_apply(cdf, h, f, x) - f(x)));
    drift.push_back(worst);
  }
  ctx.add("strong_continuity", static_cast<double>(non_decreasing_steps(drift)), 0.0, "<=",
          {{"sup_drift", drift}});

  const double x = 0.25 * c;
  const MeanEstimate mc = semigroup_monte_carlo(cdf, 1.0, f, x, 10 * s.resolved_draws(), s.seed);
  const double exact = semigroup_apply(cdf, 1.0, f, x);
  ctx.add("semigroup_monte_carlo", std::fabs(mc.mean - exact) / mc.std_error, 3.0, "<=",
          {{"x", x}, {"t", 1.0}, {"quadrature", exact}, {"mc_mean", mc.mean},
           {"mc_std_error", mc.std_error}});
}

void verify_generator(Context& ctx, const LimitCdf& cdf, const TestFunction& f) {
  const double c = f.support();
  const std::vector<double> xs = {0.0, c / 8, c / 4, c / 2, 0.75 * c, 0.95 * c};
  const std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
  const GeneratorCheck g = generator_limit_check(cdf, f, xs, hs);
  Table& out = ctx.table("generator", {"x", "h", "difference_quotient", "generator", "error"});
  for (const auto& r : g.rows) out.add_row({r.x, r.h, r.difference_quotient, r.generator, r.error});
  json orders = json::array();
  for (const auto& [x, order] : g.orders) orders.push_back({{"x", x}, {"order", order}});
  ctx.add("generator_decreasing", g.decreasing ? 0.0 : 1.0, 0.0, "<=");
  ctx.add("generator_first_order", g.min_order, g.required_order, ">=", {{"orders", orders}});
  const GeneratorCheck zero = generator_limit_check(cdf, TestFunction::zero(c), xs, hs);
  double worst = 0.0;
  for (const auto& r : zero.rows) worst = std::max(worst, r.error);
  ctx.add("generator_zero_function", worst, 0.0, "<=");
}

void verify_discrete_generator(Context& ctx, const LimitCdf& cdf, const TestFunction& f) {
  const auto& s = ctx.spec;
  const double c = f.support();
  const std::vector<double> xs = {0.0, c / 4, c / 2};
  const auto ns = s.resolved_n_grid();
  const std::size_t draws = 10 * s.resolved_draws();
  Table& out = ctx.table("discrete_generator",
                         {"n", "x", "A_n", "generator", "abs_err", "mc_mean", "mc_std_error"});
  std::vector<std::vector<double>> errors(xs.size());
  double worst_z = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const HeavyTrafficSchedule sch = schedule(ctx.dist, s.gamma, ns[i]);
    const MaxSampler sampler = tabulated_sampler(tabulate(sch.lambda_n, ctx.dist, chain_grid(sch), s.threads));
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double an = discrete_generator(sch, f, xs[j]);
      const double gen = generator_apply(cdf.kappa(), f, xs[j]);
      const MeanEstimate mc = discrete_generator_monte_carlo(
          sch, sampler, f, xs[j], draws, s.seed + 1000 * i + j, s.threads);
      errors[j].push_back(std::fabs(an - gen));
      worst_z = std::max(worst_z, std::fabs(mc.mean - an) / mc.std_error);
      out.add_row({ns[i], xs[j], an, gen, std::fabs(an - gen), mc.mean, mc.std_error});
    }
  }
  std::size_t bad = 0;
  for (const auto& e : errors) bad += non_decreasing_steps(e);
  ctx.add("discrete_generator_decreasing", static_cast<double>(bad), 0.0, "<=");
  ctx.add("discrete_generator_monte_carlo", worst_z, 3.0, "<=", {{"draws", draws}});
}

void verify_max_convolution(Context& ctx, const LimitCdf& cdf) {
  const auto& s = ctx.spec;
  const auto grid_s = numerics::log_space(0.1, 5.0, 10);
  const auto grid_x = numerics::log_space(0.01, 10.0, 10);
  const std::size_t draws = s.resolved_draws();
  const MaxConvolutionReport r =
      max_convolution_check(cdf, grid_s, grid_s, grid_x, 0.5, 1.0, draws, s.seed);
  ctx.add("max_convolution_identity", r.identity_error, 1e-8, "<=",
          {{"points", r.identity_points}});
  ctx.add("max_convolution_ks", r.ks, ctx.ks_tolerance(0.01, static_cast<double>(draws), 1e5, true), "<",
          {{"draws", r.draws}, {"s", 0.5}, {"t", 1.0}});
}

void verify_iterates(Context& ctx, const TestFunction& f) {
  const auto& s = ctx.spec;
  const double n = s.n.value_or(1e3);
  const HeavyTrafficSchedule sch = schedule(ctx.dist, s.gamma, n);
  const MaxSampler sampler = tabulated_sampler(tabulate(sch.lambda_n, ctx.dist, chain_grid(sch), s.threads));
  const std::size_t reps = s.resolved_reps();
  const TwoSampleReport r =
      iterate_representation_check(sch, sampler, f, s.x0, s.t, reps, s.seed, s.threads);
  ctx.add("iterates_ks", r.ks, ctx.ks_tolerance(0.02, static_cast<double>(reps), 1e4, true), "<",
          {{"n", n}, {"t", s.t}, {"reps", reps}});
  ctx.add("iterates_mean", r.mean_z, 3.0, "<=",
          {{"sequential", r.mean_a.mean}, {"representation", r.mean_b.mean}});
}

void run_verify(Context& ctx) {
  const auto& s = ctx.spec;
  const auto& names = s.checks.empty() ? verify_check_names() : s.checks;
  const KappaParams p = KappaParams::from_service(ctx.dist, s.gamma);
  const LimitCdf cdf{KappaFunction(p, {}, s.threads)};
  const TestFunction f = TestFunction::bump(s.c);
  for (const auto& name : names) {
    if (name == "semigroup") verify_semigroup(ctx, cdf, f);
    if (name == "generator") verify_generator(ctx, cdf, f);
    if (name == "discrete-generator") verify_discrete_generator(ctx, cdf, f);
    if (name == "max-convolution") verify_max_convolution(ctx, cdf);
    if (name == "iterates") verify_iterates(ctx, f);
  }
}

}  // namespace

RunReport run(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.spec = spec;
  report.version = version_string();
  Context ctx{spec, report, service_of(spec)};
  try {
    switch (spec.kind) {
      case ExperimentKind::SolveM: run_solve_m(ctx); break;
      case ExperimentKind::SolveKappa: run_solve_kappa(ctx); break;
      case ExperimentKind::Phi: run_phi(ctx); break;
      case ExperimentKind::SimulateDes: run_simulate_des(ctx); break;
      case ExperimentKind::SimulateChain: run_simulate_chain(ctx); break;
      case ExperimentKind::Theorem1: run_theorem1(ctx); break;
      case ExperimentKind::Theorem2: run_theorem2(ctx); break;
      case ExperimentKind::SteadyState: run_steady_state(ctx); break;
      case ExperimentKind::Verify: run_verify(ctx); break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError("", e.what());
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace tandem
