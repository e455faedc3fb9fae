#pragma once

// Scalar diagnostics of adiabatic-theorem validity: survival probability Q,
// eigenstate overlap F0, the F1 inconsistency pair, the fidelity against the
// H_A-generated evolution, the projector prediction residual, and their
// classical-ensemble averages.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adia/propagation.hpp"

namespace adia {

/// P+- = (1 +- Rhat.sigma) / 2 from the frame's field.
Mat2 instantaneous_projector(const SpectralFrame& frame, Branch branch);

/// |v><v| / <v|v>.
Mat2 state_projector(const Vec2& v);

/// Q = Tr P_{U|E(t0)>} P_{|E(t)>}. Projectors onto evolved states are
/// normalized; integrator drift shows up in Trajectory::unitarity_errors.
double survival_q(const Trajectory& trajectory, std::size_t index, Branch branch = Branch::plus);

/// Same quantity through |<E(t)|U|E(t0)>|^2.
double survival_q_overlap(const Trajectory& trajectory, std::size_t index,
                          Branch branch = Branch::plus);

/// Closed-form Q for propagators of the form exp(-i theta(t) n(t).sigma)
/// with U(0) = 1:
///   Q = (1 + n(0).[theta' n + cos sin n' - sin^2 n x n'] / |R|) / 2.
/// Supported for Counterexample and RotatingField; UnsupportedModel otherwise.
double q_analytic(const HamiltonianModel& model, double t);

/// F0 = |<E(t_i)|E(t_0)>|.
double overlap_f0(std::span<const SpectralFrame> frames, std::size_t index,
                  Branch branch = Branch::plus);

/// |<E(0)| U U^dagger |E(0)>|, identically one for a unitary U.
double f1_exact(const Trajectory& trajectory, std::size_t index, Branch branch = Branch::plus);
/// |<E(0)| U |E(0)>|, the value the naive adiabatic chain equates with F0.
double f1_naive(const Trajectory& trajectory, std::size_t index, Branch branch = Branch::plus);

struct InconsistencyReport {
  double f1_exact;
  double f1_naive;
  double f0;
};

/// Evaluated at the end of the grid.
InconsistencyReport inconsistency_demo(const HamiltonianModel& model, const TimeGrid& grid,
                                       const IntegratorConfig& cfg, Branch branch = Branch::plus);

/// F = Tr sqrt(P_U^{1/2} P_{U_A} P_U^{1/2}) between U|E(t0)> and U_A|E(t0)>.
/// `exact` must carry frames; `avron` is the H_A propagator on the same grid.
double avron_fidelity(const Trajectory& exact, const Trajectory& avron, std::size_t index,
                      Branch branch = Branch::plus);
double avron_fidelity(const HamiltonianModel& model, const TimeGrid& grid,
                      const IntegratorConfig& cfg, std::size_t index, Branch branch = Branch::plus);

/// || U P_{|E(t0)>} U^dagger - P_{|E(t)>} ||_F; sqrt(2) for orthogonal projectors.
double adiabatic_prediction_check(const Trajectory& trajectory, std::size_t index,
                                  Branch branch = Branch::plus);

struct EnsembleMember {
  double weight;
  HamiltonianModel model;
};

/// Classical mixture of Hamiltonians H^(alpha) occurring with probability p_alpha.
class EnsembleSpec {
 public:
  /// Throws InvalidArgument for empty input, weights outside (0, 1], or
  /// weights not summing to one within tol::kEnsembleWeightSum.
  explicit EnsembleSpec(std::vector<EnsembleMember> members);

  const std::vector<EnsembleMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

 private:
  std::vector<EnsembleMember> members_;
};

/// F0 = Tr sum_alpha p_alpha P_{|E_alpha(t0)>} P_{|E_alpha(t)>}.
double ensemble_f0(const EnsembleSpec& spec, double t0, double t, Branch branch = Branch::plus);

/// Q = Tr sum_alpha p_alpha P_{U_alpha|E_alpha(t0)>} P_{|E_alpha(t)>}; one
/// trajectory per member, in member order.
double ensemble_q(const EnsembleSpec& spec, std::size_t index,
                  std::span<const Trajectory> trajectories, Branch branch = Branch::plus);

/// Propagates every member, concurrently up to `threads` at a time. A member
/// failure is rethrown as EnsembleMemberError carrying its index.
std::vector<Trajectory> propagate_ensemble(const EnsembleSpec& spec, const TimeGrid& grid,
                                           const IntegratorConfig& cfg, std::size_t threads);

/// One time sample of every diagnostic; members are empty when not computed.
struct DiagnosticsRecord {
  double t = 0.0;
  std::optional<double> adiabaticity_ratio;
  std::optional<double> q_numeric;
  std::optional<double> q_analytic;
  std::optional<double> f0;
  std::optional<double> f1_exact;
  std::optional<double> f1_naive;
  std::optional<double> fidelity_avron;
  std::optional<double> prediction_residual;
};

}  // namespace adia
