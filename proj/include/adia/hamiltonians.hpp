#pragma once

// Time-dependent two-level Hamiltonians H(t) = a0(t) 1 + R(t).sigma, their
// instantaneous spectra in a parallel-transport gauge, and the adiabaticity
// ratio |<E+|dE-/dt>| / |E+ - E-|.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "adia/mat2.hpp"

namespace adia {

/// U(t) = exp(-i omega0 t n(t).sigma) with n(t) = (cos 2pi t/tau, sin 2pi t/tau, 0).
/// H(t) = i dU/dt U^dagger = omega0 n + (sin(omega0 t)/tau) Rtilde(t).
struct Counterexample {
  Counterexample(double omega0, double tau);
  double omega0;
  double tau;
};

/// Spin-1/2 in a field of strength omega0 rotating in the x-y plane with period tau.
struct RotatingField {
  RotatingField(double omega0, double tau);
  double omega0;
  double tau;
};

/// R(t) = rabi e_x - (sweep_rate t / 2) e_z; the avoided crossing sits at t = 0.
struct LandauZener {
  LandauZener(double rabi, double sweep_rate);
  double rabi;
  double sweep_rate;
};

struct Constant {
  explicit Constant(const RealVec3& r, double a0 = 0.0);
  RealVec3 r;
  double a0;
};

/// User model sampled on a uniform grid (a0, R) and interpolated with cubic
/// Hermite (Catmull-Rom) splines. Copies share the sample table.
class Tabulated {
 public:
  struct Sample {
    double t;
    double a0;
    RealVec3 r;
  };

  explicit Tabulated(std::vector<Sample> samples);

  double t_begin() const { return data_->front().t; }
  double t_end() const { return data_->back().t; }
  const std::vector<Sample>& samples() const { return *data_; }

  /// Interpolated (a0, R); throws InvalidArgument outside [t_begin, t_end].
  std::pair<double, RealVec3> evaluate(double t) const;

 private:
  std::shared_ptr<const std::vector<Sample>> data_;
  double step_;
};

using HamiltonianModel = std::variant<Counterexample, RotatingField, LandauZener, Constant, Tabulated>;

/// Parses the `# adia-model v1` text format: one `t a0 Rx Ry Rz` line per sample.
Tabulated parse_tabulated_model(std::istream& in);
Tabulated load_tabulated_model(const std::filesystem::path& path);

/// Period tau for models that carry one.
std::optional<double> model_period(const HamiltonianModel& model);
std::string model_name(const HamiltonianModel& model);

struct FieldSample {
  double a0;
  RealVec3 r;
};

FieldSample field_vector(const HamiltonianModel& model, double t);

/// dR/dt: analytic for the built-in models, central difference for Tabulated.
RealVec3 field_derivative(const HamiltonianModel& model, double t);

Mat2 hamiltonian(const HamiltonianModel& model, double t);

enum class Branch { plus, minus };

/// Instantaneous eigensystem at time t. Eigenvectors are stored in the
/// parallel-transport gauge when the frame was linked to a predecessor; the
/// phase relative to the closed-form branch vector is kept in gauge_phase_*.
struct SpectralFrame {
  double t = 0.0;
  double a0 = 0.0;
  RealVec3 field = RealVec3::Zero();
  double e_plus = 0.0;
  double e_minus = 0.0;
  Vec2 v_plus = Vec2::Zero();
  Vec2 v_minus = Vec2::Zero();
  double gauge_phase_plus = 0.0;
  double gauge_phase_minus = 0.0;
  /// True when the phases were fixed against a previous frame (or the frame
  /// anchors a chain).
  bool gauge_linked = false;

  const Vec2& vector(Branch b) const { return b == Branch::plus ? v_plus : v_minus; }
  double energy(Branch b) const { return b == Branch::plus ? e_plus : e_minus; }
  double gauge_phase(Branch b) const {
    return b == Branch::plus ? gauge_phase_plus : gauge_phase_minus;
  }
  /// Eigenvector in the closed-form branch gauge: exp(-i gauge_phase) * vector.
  Vec2 branch_vector(Branch b) const;
};

/// Eigenvectors of a0 + R.sigma from the closed-form branch formula, which
/// switches on sign(R_z) to stay away from the antipodal singularity.
std::pair<Vec2, Vec2> branch_eigenvectors(const RealVec3& r);

SpectralFrame spectral_frame_from_field(double t, double a0, const RealVec3& r);
SpectralFrame spectral_frame_from_field(double t, double a0, const RealVec3& r,
                                        const SpectralFrame& prev);

/// Throws DegenerateSpectrum when |R(t)| <= tol::kGapFloor.
SpectralFrame spectral_frame(const HamiltonianModel& model, double t);
/// Same, with each eigenvector re-phased so that <prev|v> is real positive.
SpectralFrame spectral_frame(const HamiltonianModel& model, double t, const SpectralFrame& prev);

/// <E+|dE-/dt> = <E+|dH/dt|E-> / (E- - E+) in the frame's gauge.
Complex coupling_element(const HamiltonianModel& model, double t, const SpectralFrame& frame);

double adiabaticity_ratio(const HamiltonianModel& model, double t);

bool has_closed_form_unitary(const HamiltonianModel& model);

/// Exact propagator U(t, 0) for Counterexample and RotatingField; throws
/// UnsupportedModel otherwise.
Mat2 closed_form_unitary(const HamiltonianModel& model, double t);

}  // namespace adia
