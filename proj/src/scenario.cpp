#include "adia/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "adia/parallel.hpp"

namespace adia {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

using Section = std::map<std::string, std::string>;

struct RawConfig {
  std::map<std::string, Section> sections;
};

RawConfig read_raw(std::istream& in) {
  RawConfig raw;
  std::string current;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    const std::string body = trim(cut == std::string::npos ? line : line.substr(0, cut));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
      }
      current = lower(trim(body.substr(1, body.size() - 2)));
      if (current.empty()) throw ConfigError("line " + std::to_string(lineno), "empty section name");
      raw.sections[current];
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    }
    if (current.empty()) {
      throw ConfigError("line " + std::to_string(lineno), "key outside of a section");
    }
    const std::string key = lower(trim(body.substr(0, eq)));
    if (!raw.sections[current].emplace(key, trim(body.substr(eq + 1))).second) {
      throw ConfigError(current + "." + key, "duplicate key");
    }
  }
  return raw;
}

class SectionReader {
 public:
  SectionReader(std::string name, const Section& values) : name_(std::move(name)), values_(values) {}

  std::string path(const std::string& key) const { return name_ + "." + key; }

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string required_text(const std::string& key) {
    auto v = text(key);
    if (!v) throw ConfigError(path(key), "missing required key");
    return *v;
  }

  std::optional<double> number(const std::string& key) {
    const auto v = text(key);
    if (!v) return std::nullopt;
    try {
      return parse_number(*v);
    } catch (const std::exception&) {
      throw ConfigError(path(key), "not a number: '" + *v + "'");
    }
  }

  double required_number(const std::string& key) {
    auto v = number(key);
    if (!v) throw ConfigError(path(key), "missing required key");
    return *v;
  }

  double positive(const std::string& key) {
    const double v = required_number(key);
    if (!(v > 0.0)) throw ConfigError(path(key), "must be > 0");
    return v;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : values_) {
      if (!used_.contains(key)) throw ConfigError(path(key), "unknown key");
    }
  }

 private:
  std::string name_;
  const Section& values_;
  std::set<std::string> used_;
};

HamiltonianModel read_model(SectionReader& r, const std::filesystem::path& base_dir) {
  const std::string type = lower(r.required_text("type"));
  try {
    if (type == "counterexample") {
      return Counterexample(r.positive("omega0"), r.positive("tau"));
    }
    if (type == "rotating_field") {
      return RotatingField(r.positive("omega0"), r.positive("tau"));
    }
    if (type == "landau_zener") {
      const double rabi = r.required_number("rabi");
      if (rabi == 0.0) throw ConfigError(r.path("rabi"), "must be nonzero");
      return LandauZener(rabi, r.required_number("sweep_rate"));
    }
    if (type == "constant") {
      return Constant(RealVec3(r.number("rx").value_or(0.0), r.number("ry").value_or(0.0),
                               r.number("rz").value_or(0.0)),
                      r.number("a0").value_or(0.0));
    }
    if (type == "tabulated") {
      std::filesystem::path file = r.required_text("path");
      if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
      try {
        return load_tabulated_model(file);
      } catch (const InvalidArgument& e) {
        throw ConfigError(r.path("path"), e.what());
      }
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.path("type"), e.what());
  }
  throw ConfigError(r.path("type"), "unknown model type '" + type + "'");
}

const char* diagnostic_name(Diagnostic d) {
  switch (d) {
    case Diagnostic::adicrit: return "adicrit";
    case Diagnostic::q: return "q";
    case Diagnostic::q_analytic: return "q_analytic";
    case Diagnostic::f0: return "f0";
    case Diagnostic::f1: return "f1";
    case Diagnostic::avron_fidelity: return "avron_fidelity";
    case Diagnostic::prediction_check: return "prediction_check";
  }
  return "?";
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string s = lower(trim(text));
  if (s.empty()) throw InvalidArgument("empty number");
  double value = 1.0;
  char op = '*';
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find_first_of("*/", pos);
    const std::string token = trim(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    double factor = 0.0;
    if (token == "pi") {
      factor = std::numbers::pi;
    } else {
      std::size_t used = 0;
      factor = std::stod(token, &used);
      if (used != token.size()) throw InvalidArgument("bad number '" + text + "'");
    }
    value = op == '*' ? value * factor : value / factor;
    if (next == std::string::npos) break;
    op = s[next];
    pos = next + 1;
  }
  if (!std::isfinite(value)) throw InvalidArgument("non-finite number '" + text + "'");
  return value;
}

std::optional<Diagnostic> parse_diagnostic(const std::string& name) {
  static const std::map<std::string, Diagnostic> names{
      {"adicrit", Diagnostic::adicrit},         {"q", Diagnostic::q},
      {"q_analytic", Diagnostic::q_analytic},   {"f0", Diagnostic::f0},
      {"f1", Diagnostic::f1},                   {"avron_fidelity", Diagnostic::avron_fidelity},
      {"prediction_check", Diagnostic::prediction_check},
  };
  const auto it = names.find(lower(trim(name)));
  if (it == names.end()) return std::nullopt;
  return it->second;
}

std::set<Diagnostic> supported_diagnostics(const HamiltonianModel& model) {
  std::set<Diagnostic> all{Diagnostic::adicrit, Diagnostic::q,  Diagnostic::f0,
                           Diagnostic::f1,      Diagnostic::avron_fidelity,
                           Diagnostic::prediction_check};
  if (std::holds_alternative<Counterexample>(model) || std::holds_alternative<RotatingField>(model)) {
    all.insert(Diagnostic::q_analytic);
  }
  return all;
}

void ScenarioConfig::validate() const {
  if (!model && !ensemble) {
    throw ConfigError("model", "a [model] section or [ensemble.N] sections are required");
  }
  if (model && ensemble) {
    throw ConfigError("ensemble", "use either [model] or [ensemble.N], not both");
  }
  try {
    integrator.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("integrator", e.what());
  }
  if (model) {
    const auto supported = supported_diagnostics(*model);
    for (Diagnostic d : diagnostics) {
      if (!supported.contains(d)) {
        throw ConfigError("diagnostics.list", std::string(diagnostic_name(d)) +
                                                  " is not available for model '" +
                                                  model_name(*model) + "'");
      }
    }
  }
}

ScenarioConfig parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
  const RawConfig raw = read_raw(in);
  ScenarioConfig cfg;

  std::vector<EnsembleMember> members;
  std::map<std::size_t, std::string> member_sections;
  for (const auto& [name, values] : raw.sections) {
    if (name == "model" || name == "grid" || name == "integrator" || name == "diagnostics" ||
        name == "output") {
      continue;
    }
    if (name.rfind("ensemble.", 0) == 0) {
      const std::string idx = name.substr(9);
      if (idx.empty() || !std::all_of(idx.begin(), idx.end(), ::isdigit)) {
        throw ConfigError(name, "ensemble sections are named ensemble.N with integer N");
      }
      member_sections.emplace(std::stoul(idx), name);
      continue;
    }
    throw ConfigError(name, "unknown section");
  }

  if (auto it = raw.sections.find("model"); it != raw.sections.end()) {
    SectionReader r("model", it->second);
    cfg.model = read_model(r, base_dir);
    r.reject_unknown();
  }

  std::size_t expected = 0;
  for (const auto& [idx, name] : member_sections) {
    if (idx != expected++) {
      throw ConfigError(name, "ensemble members must be numbered 0, 1, 2, ... without gaps");
    }
    SectionReader r(name, raw.sections.at(name));
    const double weight = r.required_number("weight");
    members.push_back({weight, read_model(r, base_dir)});
    r.reject_unknown();
  }
  if (!members.empty()) {
    try {
      cfg.ensemble.emplace(std::move(members));
    } catch (const InvalidArgument& e) {
      throw ConfigError("ensemble", e.what());
    }
  }

  {
    const auto it = raw.sections.find("grid");
    if (it == raw.sections.end()) throw ConfigError("grid", "missing [grid] section");
    SectionReader r("grid", it->second);
    const double t0 = r.required_number("t0");
    const double t1 = r.required_number("t1");
    const double steps = r.required_number("steps");
    if (!(t1 > t0)) throw ConfigError("grid.t1", "must exceed grid.t0");
    if (steps < 2 || steps != std::floor(steps)) throw ConfigError("grid.steps", "must be an integer >= 2");
    cfg.grid = TimeGrid(t0, t1, static_cast<std::size_t>(steps));
    r.reject_unknown();
  }

  bool auto_sub = false;
  if (auto it = raw.sections.find("integrator"); it != raw.sections.end()) {
    SectionReader r("integrator", it->second);
    if (auto m = r.text("method")) {
      const std::string method = lower(*m);
      if (method == "rk4_fixed") {
        cfg.integrator.method = IntegrationMethod::rk4_fixed;
      } else if (method == "rk45_adaptive") {
        cfg.integrator.method = IntegrationMethod::rk45_adaptive;
      } else {
        throw ConfigError(r.path("method"), "expected rk4_fixed or rk45_adaptive");
      }
    }
    if (auto v = r.number("rel_tol")) cfg.integrator.rel_tol = *v;
    if (auto v = r.number("abs_tol")) cfg.integrator.abs_tol = *v;
    if (auto v = r.number("max_unitarity_drift")) cfg.integrator.max_unitarity_drift = *v;
    if (auto v = r.text("substeps")) {
      if (lower(*v) == "auto") {
        auto_sub = true;
      } else {
        const auto n = r.number("substeps");
        if (*n < 1 || *n != std::floor(*n)) throw ConfigError(r.path("substeps"), "must be an integer >= 1 or 'auto'");
        cfg.integrator.substeps = static_cast<std::size_t>(*n);
      }
    }
    for (const char* key : {"rel_tol", "abs_tol", "max_unitarity_drift"}) {
      if (auto v = r.number(key); v && !(*v > 0.0)) throw ConfigError(r.path(key), "must be > 0");
    }
    r.reject_unknown();
  }
  if (auto_sub) {
    std::size_t worst = 1;
    if (cfg.model) worst = auto_substeps(*cfg.model, cfg.grid);
    if (cfg.ensemble) {
      for (const auto& m : cfg.ensemble->members()) worst = std::max(worst, auto_substeps(m.model, cfg.grid));
    }
    cfg.integrator.substeps = worst;
  }

  if (auto it = raw.sections.find("diagnostics"); it != raw.sections.end()) {
    SectionReader r("diagnostics", it->second);
    if (auto list = r.text("list")) {
      std::stringstream ss(*list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (lower(item) == "all") {
          for (Diagnostic d : {Diagnostic::adicrit, Diagnostic::q, Diagnostic::q_analytic, Diagnostic::f0,
                               Diagnostic::f1, Diagnostic::avron_fidelity, Diagnostic::prediction_check}) {
            if (!cfg.model || supported_diagnostics(*cfg.model).contains(d)) cfg.diagnostics.insert(d);
          }
          continue;
        }
        const auto d = parse_diagnostic(item);
        if (!d) throw ConfigError(r.path("list"), "unknown diagnostic '" + item + "'");
        cfg.diagnostics.insert(*d);
      }
    }
    if (auto b = r.text("branch")) {
      const std::string branch = lower(*b);
      if (branch == "plus" || branch == "+") {
        cfg.branch = Branch::plus;
      } else if (branch == "minus" || branch == "-") {
        cfg.branch = Branch::minus;
      } else {
        throw ConfigError(r.path("branch"), "expected plus or minus");
      }
    }
    r.reject_unknown();
  } else if (cfg.model) {
    cfg.diagnostics = supported_diagnostics(*cfg.model);
  }

  if (auto it = raw.sections.find("output"); it != raw.sections.end()) {
    SectionReader r("output", it->second);
    if (auto p = r.text("path")) cfg.output_path = *p;
    if (auto p = r.text("per_member")) {
      const std::string v = lower(*p);
      if (v != "true" && v != "false") throw ConfigError(r.path("per_member"), "expected true or false");
      cfg.per_member = v == "true";
    }
    r.reject_unknown();
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  return parse_scenario(in, path.parent_path());
}

// ---------------------------------------------------------------------------
// CSV

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns{
      "t",       "t_over_tau", "e_plus",   "e_minus",        "adicrit_ratio",       "q_numeric",
      "q_analytic", "f0",     "f1_exact", "f1_naive",       "fidelity_avron", "prediction_residual",
      "unitarity_error"};
  return columns;
}

std::string format_value(std::optional<double> value) {
  if (!value) return {};
  const double v = *value == 0.0 ? 0.0 : *value;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::size_t CsvReport::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidArgument("no CSV column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::optional<double> CsvReport::value(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  if (cell.empty()) return std::nullopt;
  return std::stod(cell);
}

void CsvReport::write(std::ostream& out) const {
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  out << kVersionLine << '\n';
  line(header);
  for (const auto& r : rows) line(r);
}

std::string CsvReport::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Scenarios

std::size_t auto_substeps(const HamiltonianModel& model, const TimeGrid& grid, double phase_step) {
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto f = field_vector(model, grid.time(i));
    peak = std::max(peak, std::abs(f.a0) + f.r.norm());
  }
  const double needed = std::ceil(grid.spacing() * peak / phase_step);
  return std::max<std::size_t>(1, static_cast<std::size_t>(needed));
}

namespace {

std::vector<std::string> base_row(const DiagnosticsRecord& rec, std::optional<double> tau,
                                  std::optional<double> e_plus, std::optional<double> e_minus,
                                  std::optional<double> unitarity) {
  return {format_value(rec.t),
          format_value(tau ? std::optional<double>(rec.t / *tau) : std::nullopt),
          format_value(e_plus),
          format_value(e_minus),
          format_value(rec.adiabaticity_ratio),
          format_value(rec.q_numeric),
          format_value(rec.q_analytic),
          format_value(rec.f0),
          format_value(rec.f1_exact),
          format_value(rec.f1_naive),
          format_value(rec.fidelity_avron),
          format_value(rec.prediction_residual),
          format_value(unitarity)};
}

}  // namespace

CsvReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  if (config.ensemble) return run_ensemble(config);

  const HamiltonianModel& model = *config.model;
  const auto& want = config.diagnostics;
  const bool need_avron = want.contains(Diagnostic::avron_fidelity);

  std::optional<Trajectory> exact;
  std::optional<Trajectory> avron;
  parallel_for(need_avron ? 2 : 1, thread_budget(), [&](std::size_t job) {
    if (job == 0) {
      exact = propagate(model, config.grid, config.integrator);
    } else {
      avron = propagate_avron(model, config.grid, config.integrator);
    }
  });

  const auto tau = model_period(model);
  const Branch b = config.branch;
  CsvReport report;
  report.header = csv_columns();
  report.rows.reserve(config.grid.size());
  for (std::size_t i = 0; i < config.grid.size(); ++i) {
    const double t = config.grid.time(i);
    const SpectralFrame& frame = exact->frames[i];
    DiagnosticsRecord rec;
    rec.t = t;
    if (want.contains(Diagnostic::adicrit)) {
      rec.adiabaticity_ratio = std::abs(coupling_element(model, t, frame)) / (frame.e_plus - frame.e_minus);
    }
    if (want.contains(Diagnostic::q)) rec.q_numeric = survival_q(*exact, i, b);
    if (want.contains(Diagnostic::q_analytic)) rec.q_analytic = q_analytic(model, t);
    if (want.contains(Diagnostic::f0)) rec.f0 = overlap_f0(exact->frames, i, b);
    if (want.contains(Diagnostic::f1)) {
      rec.f1_exact = f1_exact(*exact, i, b);
      rec.f1_naive = f1_naive(*exact, i, b);
    }
    if (need_avron) rec.fidelity_avron = avron_fidelity(*exact, *avron, i, b);
    if (want.contains(Diagnostic::prediction_check)) {
      rec.prediction_residual = adiabatic_prediction_check(*exact, i, b);
    }
    report.rows.push_back(base_row(rec, tau, frame.e_plus, frame.e_minus, exact->unitarity_errors[i]));
  }
  return report;
}

CsvReport run_ensemble(const ScenarioConfig& config) {
  if (!config.ensemble) throw ConfigError("ensemble", "no [ensemble.N] sections");
  const EnsembleSpec& spec = *config.ensemble;
  const auto trajectories = propagate_ensemble(spec, config.grid, config.integrator, thread_budget());
  const auto tau = model_period(spec.members().front().model);
  const Branch b = config.branch;

  CsvReport report;
  report.header = csv_columns();
  report.header.push_back("f0_ensemble");
  report.header.push_back("q_ensemble");
  if (config.per_member) {
    for (std::size_t m = 0; m < spec.size(); ++m) {
      report.header.push_back("f0_member_" + std::to_string(m));
      report.header.push_back("q_member_" + std::to_string(m));
    }
  }

  for (std::size_t i = 0; i < config.grid.size(); ++i) {
    DiagnosticsRecord rec;
    rec.t = config.grid.time(i);
    double drift = 0.0;
    for (const auto& tr : trajectories) drift = std::max(drift, tr.unitarity_errors[i]);
    auto row = base_row(rec, tau, std::nullopt, std::nullopt, drift);
    row.push_back(format_value(ensemble_f0(spec, config.grid.t0, rec.t, b)));
    row.push_back(format_value(ensemble_q(spec, i, trajectories, b)));
    if (config.per_member) {
      for (std::size_t m = 0; m < spec.size(); ++m) {
        const auto& tr = trajectories[m];
        const Mat2 p0 = instantaneous_projector(tr.frames.front(), b);
        const Mat2 pt = instantaneous_projector(tr.frames[i], b);
        row.push_back(format_value(std::max(0.0, (p0 * pt).trace().real())));
        row.push_back(format_value(survival_q(tr, i, b)));
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

ScenarioConfig fig1_scenario(std::size_t steps) {
  const double tau = 2.0 * std::numbers::pi * 10.0;
  ScenarioConfig cfg;
  cfg.model = Counterexample(1.0, tau);
  cfg.grid = TimeGrid(0.0, tau, steps);
  cfg.integrator.substeps = auto_substeps(*cfg.model, cfg.grid);
  cfg.diagnostics = {Diagnostic::avron_fidelity};
  return cfg;
}

ScenarioConfig lzt_scenario(double omega, double sweep, double window, std::size_t steps) {
  if (!(window > 0.0)) throw ConfigError("window", "must be > 0");
  if (omega == 0.0 || !std::isfinite(omega)) throw ConfigError("omega", "must be finite and nonzero");
  if (!std::isfinite(sweep)) throw ConfigError("sweep", "must be finite");
  ScenarioConfig cfg;
  cfg.model = LandauZener(omega, sweep);
  cfg.grid = TimeGrid(-window, window, steps);
  cfg.integrator.substeps = auto_substeps(*cfg.model, cfg.grid);
  cfg.diagnostics = {Diagnostic::adicrit, Diagnostic::q, Diagnostic::f0, Diagnostic::f1,
                     Diagnostic::prediction_check};
  return cfg;
}

}  // namespace adia
