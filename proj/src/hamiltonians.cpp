#include "adia/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace adia {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double value, const char* what) {
  if (!(std::isfinite(value) && value > 0.0)) {
    throw InvalidArgument(std::string(what) + " must be finite and > 0");
  }
}

RealVec3 rotating_axis(double t, double tau) {
  const double phi = kTwoPi * t / tau;
  return {std::cos(phi), std::sin(phi), 0.0};
}

}  // namespace

Counterexample::Counterexample(double omega0_, double tau_) : omega0(omega0_), tau(tau_) {
  require_positive(omega0, "counterexample omega0");
  require_positive(tau, "counterexample tau");
}

RotatingField::RotatingField(double omega0_, double tau_) : omega0(omega0_), tau(tau_) {
  require_positive(omega0, "rotating-field omega0");
  require_positive(tau, "rotating-field tau");
}

LandauZener::LandauZener(double rabi_, double sweep_rate_) : rabi(rabi_), sweep_rate(sweep_rate_) {
  if (!std::isfinite(rabi) || rabi == 0.0) {
    throw InvalidArgument("landau-zener rabi must be finite and nonzero");
  }
  if (!std::isfinite(sweep_rate)) {
    throw InvalidArgument("landau-zener sweep_rate must be finite");
  }
}

Constant::Constant(const RealVec3& r_, double a0_) : r(r_), a0(a0_) {
  if (!r.allFinite() || !std::isfinite(a0)) {
    throw InvalidArgument("constant field must be finite");
  }
}

// ---------------------------------------------------------------------------
// Tabulated models

Tabulated::Tabulated(std::vector<Sample> samples) {
  if (samples.size() < 2) {
    throw InvalidArgument("tabulated model needs at least two samples");
  }
  for (const auto& s : samples) {
    if (!std::isfinite(s.t) || !std::isfinite(s.a0) || !s.r.allFinite()) {
      throw InvalidArgument("tabulated model contains non-finite values");
    }
  }
  step_ = (samples.back().t - samples.front().t) / static_cast<double>(samples.size() - 1);
  if (!(step_ > 0.0)) {
    throw InvalidArgument("tabulated model times must be increasing");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double dt = samples[i].t - samples[i - 1].t;
    if (std::abs(dt - step_) > 1e-9 * std::max(1.0, std::abs(step_))) {
      throw InvalidArgument("tabulated model must use a uniform time grid (sample " +
                            std::to_string(i) + ")");
    }
  }
  data_ = std::make_shared<const std::vector<Sample>>(std::move(samples));
}

std::pair<double, RealVec3> Tabulated::evaluate(double t) const {
  const auto& s = *data_;
  const double span = 1e-12 * std::max(1.0, std::abs(t));
  if (!(t >= t_begin() - span && t <= t_end() + span)) {
    throw InvalidArgument("time " + std::to_string(t) + " outside tabulated range");
  }
  const auto last = static_cast<std::ptrdiff_t>(s.size()) - 1;
  auto i = static_cast<std::ptrdiff_t>(std::floor((t - t_begin()) / step_));
  i = std::clamp<std::ptrdiff_t>(i, 0, last - 1);
  const double u = (t - s[i].t) / step_;

  // Catmull-Rom tangents (per step), one-sided at the table ends.
  auto tangent = [&](std::ptrdiff_t k) -> Eigen::Vector4d {
    auto pack = [&](std::ptrdiff_t j) {
      return Eigen::Vector4d(s[j].a0, s[j].r.x(), s[j].r.y(), s[j].r.z());
    };
    if (k == 0) return pack(1) - pack(0);
    if (k == last) return pack(last) - pack(last - 1);
    return 0.5 * (pack(k + 1) - pack(k - 1));
  };
  const Eigen::Vector4d p0(s[i].a0, s[i].r.x(), s[i].r.y(), s[i].r.z());
  const Eigen::Vector4d p1(s[i + 1].a0, s[i + 1].r.x(), s[i + 1].r.y(), s[i + 1].r.z());
  const Eigen::Vector4d m0 = tangent(i);
  const Eigen::Vector4d m1 = tangent(i + 1);

  const double u2 = u * u;
  const double u3 = u2 * u;
  const Eigen::Vector4d p = (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 +
                            (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * m1;
  return {p[0], p.tail<3>()};
}

Tabulated parse_tabulated_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidArgument("tabulated model: empty input");
  }
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  if (trim(line) != "# adia-model v1") {
    throw InvalidArgument("tabulated model: missing '# adia-model v1' header");
  }
  std::vector<Tabulated::Sample> samples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields(body);
    Tabulated::Sample s{};
    double x = 0, y = 0, z = 0;
    std::string extra;
    if (!(fields >> s.t >> s.a0 >> x >> y >> z) || (fields >> extra)) {
      throw InvalidArgument("tabulated model: line " + std::to_string(lineno) +
                            " must hold exactly `t a0 Rx Ry Rz`");
    }
    s.r = RealVec3(x, y, z);
    samples.push_back(s);
  }
  return Tabulated(std::move(samples));
}

Tabulated load_tabulated_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot open model file " + path.string());
  }
  return parse_tabulated_model(in);
}

// ---------------------------------------------------------------------------

std::optional<double> model_period(const HamiltonianModel& model) {
  return std::visit(overloaded{
                        [](const Counterexample& m) -> std::optional<double> { return m.tau; },
                        [](const RotatingField& m) -> std::optional<double> { return m.tau; },
                        [](const auto&) -> std::optional<double> { return std::nullopt; },
                    },
                    model);
}

std::string model_name(const HamiltonianModel& model) {
  return std::visit(overloaded{
                        [](const Counterexample&) { return std::string("counterexample"); },
                        [](const RotatingField&) { return std::string("rotating_field"); },
                        [](const LandauZener&) { return std::string("landau_zener"); },
                        [](const Constant&) { return std::string("constant"); },
                        [](const Tabulated&) { return std::string("tabulated"); },
                    },
                    model);
}

FieldSample field_vector(const HamiltonianModel& model, double t) {
  return std::visit(
      overloaded{
          [t](const Counterexample& m) {
            const double theta = m.omega0 * t;
            const double phi = kTwoPi * t / m.tau;
            const double scale = kTwoPi * std::sin(theta) / m.tau;
            const RealVec3 rtilde(-std::sin(phi) * std::cos(theta), std::cos(phi) * std::cos(theta),
                                  std::sin(theta));
            return FieldSample{0.0, m.omega0 * rotating_axis(t, m.tau) + scale * rtilde};
          },
          [t](const RotatingField& m) {
            return FieldSample{0.0, m.omega0 * rotating_axis(t, m.tau)};
          },
          [t](const LandauZener& m) {
            return FieldSample{0.0, RealVec3(m.rabi, 0.0, -0.5 * m.sweep_rate * t)};
          },
          [](const Constant& m) { return FieldSample{m.a0, m.r}; },
          [t](const Tabulated& m) {
            auto [a0, r] = m.evaluate(t);
            return FieldSample{a0, r};
          },
      },
      model);
}

RealVec3 field_derivative(const HamiltonianModel& model, double t) {
  return std::visit(
      overloaded{
          [t](const Counterexample& m) {
            const double w = kTwoPi / m.tau;
            const double theta = m.omega0 * t;
            const double phi = w * t;
            // R = (omega0 cos phi - g sin phi, omega0 sin phi + g cos phi, k)
            // with g = (w/2) sin 2theta and k = w sin^2 theta.
            const double g = 0.5 * w * std::sin(2 * theta);
            const double gdot = w * m.omega0 * std::cos(2 * theta);
            const double kdot = w * m.omega0 * std::sin(2 * theta);
            const double c = std::cos(phi);
            const double s = std::sin(phi);
            return RealVec3(-m.omega0 * w * s - gdot * s - g * w * c,
                            m.omega0 * w * c + gdot * c - g * w * s, kdot);
          },
          [t](const RotatingField& m) {
            const double w = kTwoPi / m.tau;
            const double phi = w * t;
            return RealVec3(-m.omega0 * w * std::sin(phi), m.omega0 * w * std::cos(phi), 0.0);
          },
          [](const LandauZener& m) { return RealVec3(0.0, 0.0, -0.5 * m.sweep_rate); },
          [](const Constant&) -> RealVec3 { return RealVec3::Zero(); },
          [t](const Tabulated& m) -> RealVec3 {
            const double h = tol::kFiniteDiffStep * std::max(1.0, std::abs(t));
            // Shift the stencil inward at the table edges.
            const double lo = std::max(m.t_begin(), t - h);
            const double hi = std::min(m.t_end(), t + h);
            return (m.evaluate(hi).second - m.evaluate(lo).second) / (hi - lo);
          },
      },
      model);
}

Mat2 hamiltonian(const HamiltonianModel& model, double t) {
  const auto f = field_vector(model, t);
  return pauli_compose(f.a0, f.r);
}

// ---------------------------------------------------------------------------
// Spectral frames

Vec2 SpectralFrame::branch_vector(Branch b) const {
  return std::polar(1.0, -gauge_phase(b)) * vector(b);
}

std::pair<Vec2, Vec2> branch_eigenvectors(const RealVec3& r) {
  const double norm = r.norm();
  const Complex rp(r.x(), r.y());  // R_x + i R_y
  Vec2 plus;
  Vec2 minus;
  if (r.z() >= 0.0) {
    plus << Complex(norm + r.z()), rp;
    minus << -std::conj(rp), Complex(norm + r.z());
  } else {
    plus << std::conj(rp), Complex(norm - r.z());
    minus << Complex(norm - r.z()), -rp;
  }
  plus.normalize();
  minus.normalize();
  return {plus, minus};
}

namespace {

SpectralFrame unlinked_frame(double t, double a0, const RealVec3& r) {
  const double gap = r.norm();
  if (!(gap > tol::kGapFloor)) {
    throw DegenerateSpectrum(t, gap);
  }
  SpectralFrame f;
  f.t = t;
  f.a0 = a0;
  f.field = r;
  f.e_plus = a0 + gap;
  f.e_minus = a0 - gap;
  std::tie(f.v_plus, f.v_minus) = branch_eigenvectors(r);
  return f;
}

// Re-phase `raw` (closed-form gauge) so that <prev_vec|v> is real positive;
// returns the accumulated phase relative to the closed-form gauge.
double transport(const Vec2& prev_vec, double prev_phase, Vec2& v) {
  const Vec2 prev_raw = std::polar(1.0, -prev_phase) * prev_vec;
  const double phase = prev_phase - std::arg(overlap(prev_raw, v));
  v *= std::polar(1.0, phase);
  return phase;
}

}  // namespace

SpectralFrame spectral_frame_from_field(double t, double a0, const RealVec3& r) {
  return unlinked_frame(t, a0, r);
}

SpectralFrame spectral_frame_from_field(double t, double a0, const RealVec3& r,
                                        const SpectralFrame& prev) {
  SpectralFrame f = unlinked_frame(t, a0, r);
  f.gauge_phase_plus = transport(prev.v_plus, prev.gauge_phase_plus, f.v_plus);
  f.gauge_phase_minus = transport(prev.v_minus, prev.gauge_phase_minus, f.v_minus);
  f.gauge_linked = true;
  return f;
}

SpectralFrame spectral_frame(const HamiltonianModel& model, double t) {
  const auto f = field_vector(model, t);
  return spectral_frame_from_field(t, f.a0, f.r);
}

SpectralFrame spectral_frame(const HamiltonianModel& model, double t, const SpectralFrame& prev) {
  const auto f = field_vector(model, t);
  return spectral_frame_from_field(t, f.a0, f.r, prev);
}

Complex coupling_element(const HamiltonianModel& model, double t, const SpectralFrame& frame) {
  const double gap = frame.e_plus - frame.e_minus;
  if (!(gap > 2.0 * tol::kGapFloor)) {
    throw DegenerateSpectrum(t, 0.5 * gap);
  }
  const RealVec3 rdot = field_derivative(model, t);
  const Mat2 hdot = pauli_compose(0.0, rdot);
  return overlap(frame.v_plus, Vec2(hdot * frame.v_minus)) / (frame.e_minus - frame.e_plus);
}

double adiabaticity_ratio(const HamiltonianModel& model, double t) {
  const auto frame = spectral_frame(model, t);
  return std::abs(coupling_element(model, t, frame)) / (frame.e_plus - frame.e_minus);
}

bool has_closed_form_unitary(const HamiltonianModel& model) {
  return std::holds_alternative<Counterexample>(model) ||
         std::holds_alternative<RotatingField>(model);
}

Mat2 closed_form_unitary(const HamiltonianModel& model, double t) {
  if (const auto* ce = std::get_if<Counterexample>(&model)) {
    return su2_exponential(ce->omega0 * t, rotating_axis(t, ce->tau));
  }
  if (const auto* rf = std::get_if<RotatingField>(&model)) {
    // U = exp(-i w t sigma_z / 2) exp(-i K t), K = omega0 sigma_x - (w/2) sigma_z.
    const double w = kTwoPi / rf->tau;
    const RealVec3 k(rf->omega0, 0.0, -0.5 * w);
    return su2_exponential(0.5 * w * t, RealVec3(0.0, 0.0, 1.0)) *
           su2_exponential(k.norm() * t, RealVec3(k.normalized()));
  }
  throw UnsupportedModel("closed_form_unitary: no closed form for model '" + model_name(model) + "'");
}

}  // namespace adia
