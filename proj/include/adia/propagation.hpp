#pragma once

// Exact and adiabatic propagators along a uniform time grid.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "adia/hamiltonians.hpp"

namespace adia {

/// Uniform output grid t_i = t0 + i (t1 - t0) / steps, i = 0..steps.
struct TimeGrid {
  TimeGrid(double t0, double t1, std::size_t steps);

  double t0;
  double t1;
  std::size_t steps;

  std::size_t size() const { return steps + 1; }
  double spacing() const { return (t1 - t0) / static_cast<double>(steps); }
  double time(std::size_t i) const;
};

enum class IntegrationMethod { rk4_fixed, rk45_adaptive };

struct IntegratorConfig {
  IntegrationMethod method = IntegrationMethod::rk4_fixed;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_unitarity_drift = tol::kMaxUnitarityDrift;
  /// rk4_fixed only: RK4 steps taken per output grid interval.
  std::size_t substeps = 1;

  void validate() const;
};

using HamiltonianFn = std::function<Mat2(double)>;

/// Exact propagator samples U(t_i, t0) with gauge-linked spectral frames and
/// geometric phases. frames/beta_* are empty when the trajectory was built
/// from a bare Hamiltonian function.
struct Trajectory {
  TimeGrid grid;
  std::vector<Mat2> u_samples;
  std::vector<double> unitarity_errors;
  std::vector<SpectralFrame> frames;
  std::vector<double> beta_plus;
  std::vector<double> beta_minus;

  bool has_frames() const { return frames.size() == grid.size(); }
  const std::vector<double>& beta(Branch b) const { return b == Branch::plus ? beta_plus : beta_minus; }
};

/// Solves i dU/dt = H(t) U with U(t0) = 1. No re-unitarization is applied;
/// the drift is reported per sample. Throws IntegrationDiverged when drift
/// exceeds cfg.max_unitarity_drift and InvalidArgument for non-hermitian H.
Trajectory integrate_schrodinger(const HamiltonianFn& h, const TimeGrid& grid,
                                 const IntegratorConfig& cfg);

/// Frames at every grid time, each gauge-linked to its predecessor.
std::vector<SpectralFrame> frames_along(const HamiltonianModel& model, const TimeGrid& grid);

/// beta_n(t_i) = i int <E_n|dE_n/dt> in the closed-form branch gauge,
/// read off the parallel-transport record. Starts at 0.
std::vector<double> geometric_phase(std::span<const SpectralFrame> frames, Branch branch);

/// Discrete Berry phase of an arbitrary vector sequence:
/// beta_{i+1} = beta_i - arg <v_i|v_{i+1}>.
std::vector<double> geometric_phase_from_vectors(std::span<const Vec2> vectors);

/// Integrates the model and attaches frames and geometric phases.
Trajectory propagate(const HamiltonianModel& model, const TimeGrid& grid,
                     const IntegratorConfig& cfg);

/// int_{t0}^{t_i} E_n by the trapezoid rule on the frame grid.
std::vector<double> dynamical_phase(std::span<const SpectralFrame> frames, Branch branch);

/// U_AT(t_i) = sum_n exp(-i int E_n) exp(i beta_n) |E_n(t_i)><E_n(t0)|.
/// Throws InvalidArgument unless the trajectory carries gauge-linked frames.
std::vector<Mat2> adiabatic_propagator(const Trajectory& trajectory);

/// H_A = H + i [dP+/dt, P+] with P+ = (1 + Rhat.sigma)/2.
Mat2 avron_hamiltonian(const HamiltonianModel& model, double t);

/// Exact propagator of H_A.
Trajectory propagate_avron(const HamiltonianModel& model, const TimeGrid& grid,
                           const IntegratorConfig& cfg);

/// Hbar(t_i) = -U^dagger H U, generator of U^dagger(t, t0)|E0(t0)>.
Mat2 reversed_frame_hamiltonian(const Trajectory& trajectory, const HamiltonianModel& model,
                                std::size_t index);

/// Two-part form of -i U_AT^dagger dU_AT/dt assembled from frames, phases and
/// coupling elements, at grid index i.
Mat2 at_frame_hamiltonian(const Trajectory& trajectory, const HamiltonianModel& model,
                          std::size_t index);

/// Max Frobenius deviation over interior grid points between a five-point
/// difference of -i U_AT^dagger dU_AT/dt and at_frame_hamiltonian.
double at_frame_hamiltonian_check(const Trajectory& trajectory, std::span<const Mat2> u_at,
                                  const HamiltonianModel& model);

}  // namespace adia
