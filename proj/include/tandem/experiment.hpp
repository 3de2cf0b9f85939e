// Declarative experiments: a JSON spec in, CSV tables and a JSON report out.
#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"  // nlohmann::json

namespace tandem {

enum class ExperimentKind {
  SolveM,
  SolveKappa,
  Phi,
  SimulateDes,
  SimulateChain,
  Theorem1,
  Theorem2,
  SteadyState,
  Verify,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(const std::string& name);
const std::vector<std::string>& kind_names();

enum class Profile { Fast, Full };

std::string to_string(Profile profile);
std::optional<Profile> parse_profile(const std::string& name);

/// Bad configuration; `field` is a JSON path such as "n_grid[2]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Names accepted in `checks` for kind=verify.
const std::vector<std::string>& verify_check_names();

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Verify;
  Profile profile = Profile::Full;

  double nu = 1.5;
  double b = 1.0;
  double gamma = 0.0;
  std::optional<double> lambda;  // fixed-rate kinds; at most one of lambda, rho
  std::optional<double> rho;

  std::vector<double> n_grid;  // default {1e2, 1e3, 1e4}
  std::optional<double> n;     // single scale (iterates); default 1e3
  double t = 1.0;
  std::vector<double> t_grid;
  double x0 = 0.0;
  std::vector<double> x_grid;
  std::vector<double> y_grid;
  std::size_t grid_points = 512;
  std::optional<double> w_max;  // default 1e4 b
  double shift = 5.0;
  double c = 2.0;  // support of the test function

  // Sample sizes; unset values take the profile default.
  std::optional<std::size_t> busy_periods;
  std::optional<std::uint64_t> steps;
  std::optional<std::uint64_t> burn_in;  // 0: max(1e5, 10 / (1 - rho))
  std::optional<std::size_t> reps;
  std::optional<std::size_t> draws;

  std::uint64_t seed = 1;
  unsigned threads = 1;  // 0: one per hardware thread
  std::vector<std::string> checks;
  bool keep_events = false;
  std::string out;  // output directory; the command line --out wins

  /// Parses a JSON object; unknown fields and type mismatches raise
  /// ConfigError. `kind` may come from the document or the caller.
  static ExperimentSpec from_json(const nlohmann::json& doc,
                                  std::optional<ExperimentKind> kind = std::nullopt);
  static ExperimentSpec from_file(const std::string& path,
                                  std::optional<ExperimentKind> kind = std::nullopt);

  /// Checks every parameter against the preconditions of the modules the
  /// kind will call, before any work starts.
  void validate() const;
  nlohmann::json to_json() const;

  // Resolved values.
  double resolved_lambda() const;  // fixed-rate kinds
  std::vector<double> resolved_n_grid() const;
  std::size_t resolved_busy_periods() const;
  std::uint64_t resolved_steps() const;
  std::size_t resolved_reps() const;
  std::size_t resolved_draws() const;
  double resolved_w_max() const { return w_max.value_or(1e4 * b); }
};

/// Columns of doubles, written as CSV with %.17g.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<double> data;  // row-major

  void add_row(std::initializer_list<double> row);
  void add_row(const std::vector<double>& row);
  std::size_t rows() const { return columns.empty() ? 0 : data.size() / columns.size(); }
  double at(std::size_t row, std::size_t col) const { return data[row * columns.size() + col]; }
  std::vector<double> column(const std::string& name) const;
  std::string to_csv() const;
};

struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double tolerance = 0.0;
  std::string relation = "<=";  // statistic relation tolerance
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();
};

struct RunReport {
  ExperimentSpec spec;
  std::vector<CheckResult> checks;
  std::vector<Table> tables;
  std::vector<std::string> notes;
  double seconds = 0.0;
  std::string version;

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
  const Table* table(const std::string& name) const;
  nlohmann::json to_json() const;
  /// 0 when every check passed, 1 otherwise.
  int exit_code() const { return passed() ? 0 : 1; }
};

/// Validates the spec and runs it. Module preconditions that slip past
/// validation surface as ConfigError; numerical failures propagate as
/// NumericalError.
RunReport run(const ExperimentSpec& spec);

/// Writes every table as <dir>/<name>.csv and the report as <dir>/report.json.
/// Returns the paths written.
std::vector<std::string> write_outputs(const RunReport& report, const std::string& dir);

std::string version_string();

}  // namespace tandem
