#include "adia/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "adia/parallel.hpp"

namespace adia {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex kI(0.0, 1.0);

void require_index(const Trajectory& traj, std::size_t index, const char* who) {
  if (index >= traj.u_samples.size()) {
    throw std::out_of_range(std::string(who) + ": index " + std::to_string(index) +
                            " outside trajectory");
  }
  if (!traj.has_frames()) {
    throw InvalidArgument(std::string(who) + ": trajectory carries no spectral frames");
  }
}

double projector_trace(const Mat2& a, const Mat2& b) {
  return std::max(0.0, (a * b).trace().real());
}

// Q from a propagator U = c 1 - i u.sigma and its derivative dU/dt = a' 1 - i b.sigma.
// With u = sin(theta) n this is theta' n + cos sin n' - sin^2 n x n' rewritten
// without dividing by sin(theta):  -a' u + c b - u x b.
double q_from_propagator(const Mat2& u, const Mat2& udot, const RealVec3& n0, const RealVec3& r) {
  const auto pu = pauli_decompose(u);
  const auto pd = pauli_decompose(udot);
  const double c = pu.a0.real();
  const RealVec3 axis = (kI * pu.r).real();
  const double adot = pd.a0.real();
  const RealVec3 b = (kI * pd.r).real();
  const RealVec3 numerator = -adot * axis + c * b - axis.cross(b);
  return 0.5 * (1.0 + n0.dot(numerator) / r.norm());
}

}  // namespace

Mat2 instantaneous_projector(const SpectralFrame& frame, Branch branch) {
  const double norm = frame.field.norm();
  if (!(norm > tol::kGapFloor)) {
    throw DegenerateSpectrum(frame.t, norm);
  }
  const double sign = branch == Branch::plus ? 1.0 : -1.0;
  return 0.5 * (Mat2::Identity() + sign * pauli_compose(0.0, RealVec3(frame.field / norm)));
}

Mat2 state_projector(const Vec2& v) { return outer(v) / v.squaredNorm(); }

double survival_q(const Trajectory& traj, std::size_t index, Branch branch) {
  require_index(traj, index, "survival_q");
  const Mat2& u = traj.u_samples[index];
  const Mat2 evolved = u * instantaneous_projector(traj.frames.front(), branch) * u.adjoint();
  return projector_trace(evolved / evolved.trace().real(), instantaneous_projector(traj.frames[index], branch));
}

double survival_q_overlap(const Trajectory& traj, std::size_t index, Branch branch) {
  require_index(traj, index, "survival_q_overlap");
  const Vec2 evolved = traj.u_samples[index] * traj.frames.front().vector(branch);
  return std::norm(overlap(traj.frames[index].vector(branch), evolved)) / evolved.squaredNorm();
}

double q_analytic(const HamiltonianModel& model, double t) {
  if (const auto* ce = std::get_if<Counterexample>(&model)) {
    const double theta = ce->omega0 * t;
    const double theta_dot = ce->omega0;
    const double phi = kTwoPi * t / ce->tau;
    const double w = kTwoPi / ce->tau;
    const RealVec3 n(std::cos(phi), std::sin(phi), 0.0);
    const RealVec3 n_dot(-w * std::sin(phi), w * std::cos(phi), 0.0);
    const RealVec3 n0(1.0, 0.0, 0.0);
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const RealVec3 numerator = theta_dot * n + c * s * n_dot - s * s * n.cross(n_dot);
    return 0.5 * (1.0 + n0.dot(numerator) / field_vector(model, t).r.norm());
  }
  if (std::holds_alternative<RotatingField>(model)) {
    const Mat2 u = closed_form_unitary(model, t);
    const Mat2 udot = -kI * hamiltonian(model, t) * u;
    const RealVec3 n0 = field_vector(model, 0.0).r.normalized();
    return q_from_propagator(u, udot, n0, field_vector(model, t).r);
  }
  throw UnsupportedModel("q_analytic: model '" + model_name(model) +
                         "' has no theta(t), n(t) parametrization");
}

double overlap_f0(std::span<const SpectralFrame> frames, std::size_t index, Branch branch) {
  if (index >= frames.size()) {
    throw std::out_of_range("overlap_f0: index outside frames");
  }
  return std::abs(overlap(frames[index].vector(branch), frames.front().vector(branch)));
}

double f1_exact(const Trajectory& traj, std::size_t index, Branch branch) {
  require_index(traj, index, "f1_exact");
  const Mat2& u = traj.u_samples[index];
  const Vec2& e0 = traj.frames.front().vector(branch);
  return std::abs(overlap(e0, Vec2(u * (u.adjoint() * e0))));
}

double f1_naive(const Trajectory& traj, std::size_t index, Branch branch) {
  require_index(traj, index, "f1_naive");
  const Vec2& e0 = traj.frames.front().vector(branch);
  return std::abs(overlap(e0, Vec2(traj.u_samples[index] * e0)));
}

InconsistencyReport inconsistency_demo(const HamiltonianModel& model, const TimeGrid& grid,
                                       const IntegratorConfig& cfg, Branch branch) {
  const Trajectory traj = propagate(model, grid, cfg);
  const std::size_t end = grid.steps;
  return {f1_exact(traj, end, branch), f1_naive(traj, end, branch),
          overlap_f0(traj.frames, end, branch)};
}

double avron_fidelity(const Trajectory& exact, const Trajectory& avron, std::size_t index,
                      Branch branch) {
  require_index(exact, index, "avron_fidelity");
  if (index >= avron.u_samples.size()) {
    throw std::out_of_range("avron_fidelity: index outside H_A trajectory");
  }
  const Vec2& e0 = exact.frames.front().vector(branch);
  const Mat2 p_exact = state_projector(exact.u_samples[index] * e0);
  const Mat2 p_avron = state_projector(avron.u_samples[index] * e0);
  // P^{1/2} = P for a projector.
  return trace_sqrt_fidelity(p_exact, p_avron);
}

double avron_fidelity(const HamiltonianModel& model, const TimeGrid& grid,
                      const IntegratorConfig& cfg, std::size_t index, Branch branch) {
  const Trajectory exact = propagate(model, grid, cfg);
  const Trajectory avron = propagate_avron(model, grid, cfg);
  return avron_fidelity(exact, avron, index, branch);
}

double adiabatic_prediction_check(const Trajectory& traj, std::size_t index, Branch branch) {
  require_index(traj, index, "adiabatic_prediction_check");
  const Mat2& u = traj.u_samples[index];
  const Mat2 evolved = u * instantaneous_projector(traj.frames.front(), branch) * u.adjoint();
  return (evolved / evolved.trace().real() - instantaneous_projector(traj.frames[index], branch)).norm();
}

// ---------------------------------------------------------------------------
// Ensembles

EnsembleSpec::EnsembleSpec(std::vector<EnsembleMember> members) : members_(std::move(members)) {
  if (members_.empty()) {
    throw InvalidArgument("ensemble needs at least one member");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const double p = members_[i].weight;
    if (!(p > 0.0 && p <= 1.0)) {
      throw InvalidArgument("ensemble member " + std::to_string(i) + ": weight must lie in (0, 1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > tol::kEnsembleWeightSum) {
    throw InvalidArgument("ensemble weights sum to " + std::to_string(total) + ", expected 1");
  }
}

double ensemble_f0(const EnsembleSpec& spec, double t0, double t, Branch branch) {
  double sum = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& m = spec.members()[i];
    try {
      const Mat2 p0 = instantaneous_projector(spectral_frame(m.model, t0), branch);
      const Mat2 pt = instantaneous_projector(spectral_frame(m.model, t), branch);
      sum += m.weight * projector_trace(p0, pt);
    } catch (const std::exception& e) {
      throw EnsembleMemberError(i, e.what());
    }
  }
  return sum;
}

double ensemble_q(const EnsembleSpec& spec, std::size_t index, std::span<const Trajectory> trajectories,
                  Branch branch) {
  if (trajectories.size() != spec.size()) {
    throw InvalidArgument("ensemble_q: expected one trajectory per member");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    sum += spec.members()[i].weight * survival_q(trajectories[i], index, branch);
  }
  return sum;
}

std::vector<Trajectory> propagate_ensemble(const EnsembleSpec& spec, const TimeGrid& grid,
                                           const IntegratorConfig& cfg, std::size_t threads) {
  std::vector<std::optional<Trajectory>> slots(spec.size());
  parallel_for(spec.size(), threads, [&](std::size_t i) {
    try {
      slots[i] = propagate(spec.members()[i].model, grid, cfg);
    } catch (const std::exception& e) {
      throw EnsembleMemberError(i, e.what());
    }
  });
  std::vector<Trajectory> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace adia
