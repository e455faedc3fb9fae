#include "adia/propagation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace adia {

namespace {

const Complex kI(0.0, 1.0);

Mat2 checked(const HamiltonianFn& h, double t) {
  Mat2 m = h(t);
  if (!m.allFinite() || !is_hermitian(m)) {
    throw InvalidArgument("hamiltonian is not hermitian at t=" + std::to_string(t));
  }
  return m;
}

// dU/dt = -i H(t) U
Mat2 rhs(const HamiltonianFn& h, double t, const Mat2& u) { return -kI * (checked(h, t) * u); }

Mat2 rk4_step(const HamiltonianFn& h, double t, double dt, const Mat2& u) {
  const Mat2 k1 = rhs(h, t, u);
  const Mat2 k2 = rhs(h, t + 0.5 * dt, u + (0.5 * dt) * k1);
  const Mat2 k3 = rhs(h, t + 0.5 * dt, u + (0.5 * dt) * k2);
  const Mat2 k4 = rhs(h, t + dt, u + dt * k3);
  return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void record(Trajectory& traj, std::size_t i, const Mat2& u, const IntegratorConfig& cfg) {
  const double err = unitarity_error(u);
  if (!u.allFinite() || !(err <= cfg.max_unitarity_drift)) {
    throw IntegrationDiverged(traj.grid.time(i), err);
  }
  traj.u_samples[i] = u;
  traj.unitarity_errors[i] = err;
}

void integrate_rk4(const HamiltonianFn& h, Trajectory& traj, const IntegratorConfig& cfg) {
  const auto& grid = traj.grid;
  Mat2 u = Mat2::Identity();
  const double dt = grid.spacing() / static_cast<double>(cfg.substeps);
  for (std::size_t i = 0; i < grid.steps; ++i) {
    const double start = grid.time(i);
    for (std::size_t k = 0; k < cfg.substeps; ++k) {
      u = rk4_step(h, start + static_cast<double>(k) * dt, dt, u);
    }
    record(traj, i + 1, u, cfg);
  }
}

// Dormand-Prince 5(4) with Hairer's continuous extension for dense output.
namespace dopri {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dopri

void integrate_rk45(const HamiltonianFn& h, Trajectory& traj, const IntegratorConfig& cfg) {
  using namespace dopri;
  const auto& grid = traj.grid;
  const double t_end = grid.t1;
  double t = grid.t0;
  Mat2 u = Mat2::Identity();
  Mat2 k1 = rhs(h, t, u);

  const double hnorm = std::max(k1.norm(), 1e-12);
  double dt = std::min(grid.spacing(), 0.01 / hnorm);
  std::size_t next = 1;
  std::size_t guard = 0;
  constexpr std::size_t kMaxSteps = 100'000'000;

  while (next < grid.size()) {
    if (++guard > kMaxSteps) {
      throw std::runtime_error("rk45: step budget exhausted at t=" + std::to_string(t));
    }
    const bool last = t + dt >= t_end;
    if (last) dt = t_end - t;

    const Mat2 k2 = rhs(h, t + c2 * dt, u + dt * (a21 * k1));
    const Mat2 k3 = rhs(h, t + c3 * dt, u + dt * (a31 * k1 + a32 * k2));
    const Mat2 k4 = rhs(h, t + c4 * dt, u + dt * (a41 * k1 + a42 * k2 + a43 * k3));
    const Mat2 k5 = rhs(h, t + c5 * dt, u + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Mat2 k6 =
        rhs(h, t + dt, u + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Mat2 u_new = u + dt * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Mat2 k7 = rhs(h, t + dt, u_new);
    const Mat2 err_vec = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(u(j)), std::abs(u_new(j)));
      err += std::norm(err_vec(j) / scale);
    }
    err = std::sqrt(err / 4.0);

    if (err <= 1.0) {
      const double t_new = last ? t_end : t + dt;
      const Mat2 ydiff = u_new - u;
      const Mat2 bspl = dt * k1 - ydiff;
      const Mat2 r4 = ydiff - dt * k7 - bspl;
      const Mat2 r5 = dt * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      while (next < grid.size() && grid.time(next) <= t_new) {
        const double theta = std::min(1.0, (grid.time(next) - t) / dt);
        const double theta1 = 1.0 - theta;
        const Mat2 sample = u + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
        record(traj, next, sample, cfg);
        ++next;
      }
      t = t_new;
      u = u_new;
      k1 = k7;
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    dt *= std::clamp(factor, 0.2, 5.0);
    if (!(dt > 0.0) || t + dt == t) {
      throw std::runtime_error("rk45: step size underflow at t=" + std::to_string(t));
    }
  }
}

}  // namespace

TimeGrid::TimeGrid(double t0_, double t1_, std::size_t steps_) : t0(t0_), t1(t1_), steps(steps_) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0)) {
    throw InvalidArgument("time grid requires finite t1 > t0");
  }
  if (steps < 2) {
    throw InvalidArgument("time grid requires steps >= 2");
  }
}

double TimeGrid::time(std::size_t i) const {
  if (i == steps) return t1;
  return t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(steps);
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_unitarity_drift > 0.0)) {
    throw InvalidArgument("integrator tolerances must be > 0");
  }
  if (substeps < 1) {
    throw InvalidArgument("integrator substeps must be >= 1");
  }
}

Trajectory integrate_schrodinger(const HamiltonianFn& h, const TimeGrid& grid,
                                 const IntegratorConfig& cfg) {
  cfg.validate();
  Trajectory traj{grid, std::vector<Mat2>(grid.size()), std::vector<double>(grid.size(), 0.0), {}, {}, {}};
  traj.u_samples[0] = Mat2::Identity();
  checked(h, grid.t0);
  switch (cfg.method) {
    case IntegrationMethod::rk4_fixed:
      integrate_rk4(h, traj, cfg);
      break;
    case IntegrationMethod::rk45_adaptive:
      integrate_rk45(h, traj, cfg);
      break;
  }
  return traj;
}

std::vector<SpectralFrame> frames_along(const HamiltonianModel& model, const TimeGrid& grid) {
  std::vector<SpectralFrame> frames;
  frames.reserve(grid.size());
  frames.push_back(spectral_frame(model, grid.t0));
  frames.back().gauge_linked = true;  // anchor of the chain
  for (std::size_t i = 1; i < grid.size(); ++i) {
    frames.push_back(spectral_frame(model, grid.time(i), frames.back()));
  }
  return frames;
}

std::vector<double> geometric_phase(std::span<const SpectralFrame> frames, Branch branch) {
  std::vector<double> beta;
  beta.reserve(frames.size());
  for (const auto& f : frames) {
    beta.push_back(f.gauge_phase(branch) - frames.front().gauge_phase(branch));
  }
  return beta;
}

std::vector<double> geometric_phase_from_vectors(std::span<const Vec2> vectors) {
  std::vector<double> beta;
  if (vectors.empty()) return beta;
  beta.reserve(vectors.size());
  beta.push_back(0.0);
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    beta.push_back(beta.back() - std::arg(overlap(vectors[i - 1], vectors[i])));
  }
  return beta;
}

Trajectory propagate(const HamiltonianModel& model, const TimeGrid& grid,
                     const IntegratorConfig& cfg) {
  Trajectory traj = integrate_schrodinger([&model](double t) { return hamiltonian(model, t); },
                                          grid, cfg);
  traj.frames = frames_along(model, grid);
  traj.beta_plus = geometric_phase(traj.frames, Branch::plus);
  traj.beta_minus = geometric_phase(traj.frames, Branch::minus);
  return traj;
}

std::vector<double> dynamical_phase(std::span<const SpectralFrame> frames, Branch branch) {
  std::vector<double> phase;
  if (frames.empty()) return phase;
  phase.reserve(frames.size());
  phase.push_back(0.0);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const double dt = frames[i].t - frames[i - 1].t;
    phase.push_back(phase.back() + 0.5 * dt * (frames[i - 1].energy(branch) + frames[i].energy(branch)));
  }
  return phase;
}

namespace {

void require_linked(const Trajectory& traj) {
  if (!traj.has_frames() || traj.beta_plus.size() != traj.grid.size() ||
      traj.beta_minus.size() != traj.grid.size()) {
    throw InvalidArgument("trajectory carries no spectral frames");
  }
  for (std::size_t i = 0; i < traj.frames.size(); ++i) {
    if (!traj.frames[i].gauge_linked) {
      throw InvalidArgument("frame " + std::to_string(i) + " is not gauge-linked");
    }
  }
}

constexpr std::array<Branch, 2> kBranches{Branch::plus, Branch::minus};

}  // namespace

std::vector<Mat2> adiabatic_propagator(const Trajectory& traj) {
  require_linked(traj);
  const auto lambda_plus = dynamical_phase(traj.frames, Branch::plus);
  const auto lambda_minus = dynamical_phase(traj.frames, Branch::minus);
  const auto& first = traj.frames.front();

  std::vector<Mat2> u_at;
  u_at.reserve(traj.grid.size());
  for (std::size_t i = 0; i < traj.grid.size(); ++i) {
    Mat2 u = Mat2::Zero();
    for (Branch b : kBranches) {
      const double lambda = b == Branch::plus ? lambda_plus[i] : lambda_minus[i];
      const Complex phase = std::polar(1.0, traj.beta(b)[i] - lambda);
      u += phase * traj.frames[i].branch_vector(b) * first.branch_vector(b).adjoint();
    }
    u_at.push_back(u);
  }
  return u_at;
}

Mat2 avron_hamiltonian(const HamiltonianModel& model, double t) {
  const auto f = field_vector(model, t);
  const double norm = f.r.norm();
  if (!(norm > tol::kGapFloor)) {
    throw DegenerateSpectrum(t, norm);
  }
  const RealVec3 rhat = f.r / norm;
  const RealVec3 rdot = field_derivative(model, t);
  const RealVec3 rhat_dot = (rdot - rhat * rhat.dot(rdot)) / norm;

  const Mat2 h = pauli_compose(f.a0, f.r);
  const Mat2 p = 0.5 * (Mat2::Identity() + pauli_compose(0.0, rhat));
  const Mat2 pdot = 0.5 * pauli_compose(0.0, rhat_dot);
  return h + kI * (pdot * p - p * pdot);
}

Trajectory propagate_avron(const HamiltonianModel& model, const TimeGrid& grid,
                           const IntegratorConfig& cfg) {
  return integrate_schrodinger([&model](double t) { return avron_hamiltonian(model, t); }, grid,
                               cfg);
}

Mat2 reversed_frame_hamiltonian(const Trajectory& traj, const HamiltonianModel& model,
                                std::size_t index) {
  if (index >= traj.u_samples.size()) {
    throw std::out_of_range("reversed_frame_hamiltonian: index " + std::to_string(index) +
                            " outside trajectory");
  }
  const Mat2& u = traj.u_samples[index];
  return -(u.adjoint() * hamiltonian(model, traj.grid.time(index)) * u);
}

namespace {

Mat2 assemble_at_frame(const Trajectory& traj, const HamiltonianModel& model, std::size_t i,
                       double lambda_plus, double lambda_minus) {
  const auto& f = traj.frames[i];
  const auto& first = traj.frames.front();
  const Vec2 now[2] = {f.branch_vector(Branch::plus), f.branch_vector(Branch::minus)};
  const Vec2 start[2] = {first.branch_vector(Branch::plus), first.branch_vector(Branch::minus)};
  const double energy[2] = {f.e_plus, f.e_minus};
  const double lambda[2] = {lambda_plus, lambda_minus};
  const double beta[2] = {traj.beta_plus[i], traj.beta_minus[i]};
  const Mat2 hdot = pauli_compose(0.0, field_derivative(model, f.t));

  Mat2 out = Mat2::Zero();
  for (int n = 0; n < 2; ++n) {
    out -= energy[n] * start[n] * start[n].adjoint();
  }
  for (int n = 0; n < 2; ++n) {
    for (int m = 0; m < 2; ++m) {
      if (m == n) continue;
      // <E_n|dE_m/dt> = <E_n|dH/dt|E_m> / (E_m - E_n)
      const Complex coupling = overlap(now[n], Vec2(hdot * now[m])) / (energy[m] - energy[n]);
      const Complex phase = std::polar(1.0, (lambda[n] - lambda[m]) - (beta[n] - beta[m]));
      out -= kI * phase * coupling * start[n] * start[m].adjoint();
    }
  }
  return out;
}

}  // namespace

Mat2 at_frame_hamiltonian(const Trajectory& traj, const HamiltonianModel& model, std::size_t index) {
  require_linked(traj);
  if (index >= traj.grid.size()) {
    throw std::out_of_range("at_frame_hamiltonian: index outside trajectory");
  }
  const auto lp = dynamical_phase(std::span(traj.frames).first(index + 1), Branch::plus);
  const auto lm = dynamical_phase(std::span(traj.frames).first(index + 1), Branch::minus);
  return assemble_at_frame(traj, model, index, lp.back(), lm.back());
}

double at_frame_hamiltonian_check(const Trajectory& traj, std::span<const Mat2> u_at,
                                  const HamiltonianModel& model) {
  require_linked(traj);
  if (u_at.size() != traj.grid.size()) {
    throw InvalidArgument("at_frame_hamiltonian_check: U_AT samples do not match the grid");
  }
  const auto lp = dynamical_phase(traj.frames, Branch::plus);
  const auto lm = dynamical_phase(traj.frames, Branch::minus);
  double worst = 0.0;
  // five-point stencil, O(h^4)
  const double h = traj.grid.spacing();
  for (std::size_t i = 2; i + 2 < u_at.size(); ++i) {
    const Mat2 derivative = (u_at[i - 2] - 8.0 * u_at[i - 1] + 8.0 * u_at[i + 1] - u_at[i + 2]) / (12.0 * h);
    const Mat2 lhs = -kI * (u_at[i].adjoint() * derivative);
    const Mat2 rhs_form = assemble_at_frame(traj, model, i, lp[i], lm[i]);
    worst = std::max(worst, (lhs - rhs_form).norm());
  }
  return worst;
}

}  // namespace adia
