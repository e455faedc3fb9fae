#pragma once

// Scenario configuration, the CSV report contract, and the canned scenarios
// behind the adia-check CLI.
//
// Config format: `[section]` headers followed by `key = value` lines; `#` or
// `;` start a comment. Sections: model, grid, integrator, diagnostics,
// output, ensemble.N (one per ensemble member, N = 0, 1, ...).

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adia/diagnostics.hpp"

namespace adia {

enum class Diagnostic { adicrit, q, q_analytic, f0, f1, avron_fidelity, prediction_check };

std::optional<Diagnostic> parse_diagnostic(const std::string& name);

/// Diagnostics the model variant can provide (q_analytic needs a theta/n form).
std::set<Diagnostic> supported_diagnostics(const HamiltonianModel& model);

struct ScenarioConfig {
  std::optional<HamiltonianModel> model;
  std::optional<EnsembleSpec> ensemble;
  TimeGrid grid{0.0, 1.0, 2};
  IntegratorConfig integrator;
  std::set<Diagnostic> diagnostics;
  Branch branch = Branch::plus;
  bool per_member = false;
  std::string output_path;

  /// Throws ConfigError with a field path.
  void validate() const;
};

/// Parses the key=value config. Relative model file paths resolve against base_dir.
ScenarioConfig parse_scenario(std::istream& in, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Parses `1.5`, `pi`, `20*pi`, `2*pi*10`, `pi/2`.
double parse_number(const std::string& text);

struct CsvReport {
  static constexpr const char* kVersionLine = "# adia-check csv v1";

  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  /// Parsed value of a cell; nullopt for an empty field.
  std::optional<double> value(std::size_t row, const std::string& name) const;

  void write(std::ostream& out) const;
  std::string str() const;
};

/// Fixed leading column order of every report.
const std::vector<std::string>& csv_columns();

/// 12 significant digits; empty string for absent values.
std::string format_value(std::optional<double> value);

/// RK4 substeps per grid interval so that h * max|R| stays below `phase_step`.
std::size_t auto_substeps(const HamiltonianModel& model, const TimeGrid& grid, double phase_step = 0.005);

/// Runs a single-model scenario, or the ensemble when the config holds one.
CsvReport run_scenario(const ScenarioConfig& config);
/// Appends f0_ensemble, q_ensemble (and per-member columns when requested).
CsvReport run_ensemble(const ScenarioConfig& config);

/// Counterexample with omega0 = 1, tau = 2 pi 10, swept over [0, tau].
ScenarioConfig fig1_scenario(std::size_t steps = 4000);
/// Landau-Zener sweep over [-window, window] starting in |+(-window)>.
ScenarioConfig lzt_scenario(double omega, double sweep, double window, std::size_t steps = 2000);

}  // namespace adia
