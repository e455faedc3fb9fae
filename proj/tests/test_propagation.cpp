#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "adia/propagation.hpp"
#include "test_support.hpp"

using namespace adia;
using adia::testing::Gen;
using adia::testing::kPi;

namespace {

constexpr double kTau = 20 * kPi;
const HamiltonianModel kCounter = Counterexample(1.0, kTau);
const HamiltonianModel kRotating = RotatingField(1.0, kTau);

double max_closed_form_error(const Trajectory& traj, const HamiltonianModel& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.grid.size(); ++i) {
    worst = std::max(worst, (traj.u_samples[i] - closed_form_unitary(m, traj.grid.time(i))).norm());
  }
  return worst;
}

// Rotating-frame solution by generic matrix exponentials.
Mat2 rotating_oracle(double omega0, double tau, double t) {
  const auto& s = pauli_matrices();
  const double w = 2 * kPi / tau;
  const Complex i(0, 1);
  const Mat2 frame = (-i * (0.5 * w * t) * s[2]).exp();
  const Mat2 body = (-i * t * (omega0 * s[0] - 0.5 * w * s[2])).exp();
  return frame * body;
}

double wrap(double x) { return std::remainder(x, 2 * kPi); }

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g(0.0, 1.0, 4);
  CHECK(g.size() == 5);
  CHECK(g.time(0) == 0.0);
  CHECK(g.time(4) == 1.0);
  CHECK(g.time(2) == 0.5);
  CHECK_THROWS_AS(TimeGrid(1.0, 1.0, 4), InvalidArgument);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 1), InvalidArgument);
  IntegratorConfig bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("integrate_schrodinger: constant and zero Hamiltonians") {
  const Mat2 sz = pauli_matrices()[2];
  const auto traj = integrate_schrodinger([&](double) { return sz; }, TimeGrid(0.0, kPi, 1000), {});
  CHECK((traj.u_samples.back() + Mat2::Identity()).norm() <= 1e-10);
  CHECK((traj.u_samples.front() - Mat2::Identity()).norm() == 0.0);

  const auto zero = integrate_schrodinger([](double) { return Mat2(Mat2::Zero()); }, TimeGrid(0.0, 5.0, 10), {});
  for (const auto& u : zero.u_samples) CHECK((u - Mat2::Identity()).norm() == 0.0);
  CHECK(zero.frames.empty());
}

TEST_CASE("integrate_schrodinger: errors") {
  Mat2 bad = Mat2::Zero();
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(integrate_schrodinger([&](double) { return bad; }, TimeGrid(0, 1, 4), {}), InvalidArgument);

  // h |E| = 50 per step: RK4 amplification explodes.
  const Mat2 big = 100.0 * pauli_matrices()[2];
  try {
    integrate_schrodinger([&](double) { return big; }, TimeGrid(0, 1, 2), {});
    FAIL("expected divergence");
  } catch (const IntegrationDiverged& e) {
    CHECK(e.time() == 0.5);
    CHECK(e.drift() > 1e-8);
  }
}

TEST_CASE("exact integration matches the closed-form counterexample propagator") {
  const auto traj = propagate(kCounter, TimeGrid(0.0, kTau / 2, 2000), {});
  CHECK(max_closed_form_error(traj, kCounter) <= 1e-6);
  for (double e : traj.unitarity_errors) CHECK(e <= 1e-8);
  CHECK(traj.beta_plus.front() == 0.0);
  CHECK(traj.beta_minus.front() == 0.0);
  CHECK(traj.has_frames());
}

TEST_CASE("rk45_adaptive matches the closed form on the output grid") {
  IntegratorConfig cfg;
  cfg.method = IntegrationMethod::rk45_adaptive;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  const auto traj = propagate(kCounter, TimeGrid(0.0, kTau / 2, 500), cfg);
  CHECK(max_closed_form_error(traj, kCounter) <= 1e-8);

  const auto rot = propagate(kRotating, TimeGrid(0.0, kTau, 300), cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < rot.grid.size(); ++i) {
    worst = std::max(worst, (rot.u_samples[i] - rotating_oracle(1.0, kTau, rot.grid.time(i))).norm());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("closed-form rotating-field propagator agrees with the matrix-exponential oracle") {
  Gen gen(41);
  for (int k = 0; k < 50; ++k) {
    const double t = gen.uniform(0, 70);
    CHECK((closed_form_unitary(kRotating, t) - rotating_oracle(1.0, kTau, t)).norm() <= 1e-12);
  }
}

TEST_CASE("rk4_fixed converges at fourth order") {
  const auto coarse = propagate(kCounter, TimeGrid(0.0, kTau / 2, 2000), {});
  const auto fine = propagate(kCounter, TimeGrid(0.0, kTau / 2, 4000), {});
  const double ratio = max_closed_form_error(coarse, kCounter) / max_closed_form_error(fine, kCounter);
  CHECK(ratio >= 8.0);
  CHECK(ratio <= 20.0);

  // substeps refine the integration without changing the output grid
  IntegratorConfig sub;
  sub.substeps = 2;
  const auto split = propagate(kCounter, TimeGrid(0.0, kTau / 2, 2000), sub);
  CHECK(max_closed_form_error(split, kCounter) == doctest::Approx(max_closed_form_error(fine, kCounter)).epsilon(1e-6));
}

TEST_CASE("property: propagation composes over adjacent intervals") {
  const HamiltonianModel lz = LandauZener(1.0, 0.3);
  const auto whole = integrate_schrodinger([&](double t) { return hamiltonian(lz, t); }, TimeGrid(-5, 5, 4000), {});
  const auto first = integrate_schrodinger([&](double t) { return hamiltonian(lz, t); }, TimeGrid(-5, 1, 2400), {});
  const auto second = integrate_schrodinger([&](double t) { return hamiltonian(lz, t); }, TimeGrid(1, 5, 1600), {});
  CHECK((second.u_samples.back() * first.u_samples.back() - whole.u_samples.back()).norm() <= 1e-9);
}

TEST_CASE("adiabatic_propagator") {
  SUBCASE("constant field: U_AT is the exact propagator") {
    const HamiltonianModel c = Constant(RealVec3(0.3, -0.4, 1.2));
    const auto traj = propagate(c, TimeGrid(0.0, 10.0, 2000), {});
    const auto u_at = adiabatic_propagator(traj);
    const Mat2 h = hamiltonian(c, 0.0);
    for (std::size_t i = 0; i < u_at.size(); ++i) {
      const Mat2 exact = (Complex(0, -traj.grid.time(i)) * h).exp();
      CHECK((u_at[i] - exact).norm() <= 1e-12);
      CHECK((u_at[i] - traj.u_samples[i]).norm() <= 1e-9);
    }
  }
  SUBCASE("unitary and identity at t0") {
    const auto traj = propagate(kCounter, TimeGrid(0.0, kTau, 4000), {});
    const auto u_at = adiabatic_propagator(traj);
    CHECK((u_at.front() - Mat2::Identity()).norm() <= 1e-14);
    for (const auto& u : u_at) CHECK(unitarity_error(u) <= 1e-10);
  }
  SUBCASE("rotating field: U_AT tracks the exact solution") {
    const auto traj = propagate(kRotating, TimeGrid(0.0, kTau / 2, 2000), {});
    const auto u_at = adiabatic_propagator(traj);
    const Vec2 plus0 = traj.frames.front().v_plus;
    double worst = 1.0;
    for (std::size_t i = 0; i < u_at.size(); ++i) {
      const Vec2 exact = rotating_oracle(1.0, kTau, traj.grid.time(i)) * plus0;
      worst = std::min(worst, std::abs(overlap(Vec2(u_at[i] * plus0), exact)));
    }
    CHECK(worst >= 0.99);
  }
  SUBCASE("counterexample at tau/2: U_AT sends |+(0)> to |-(0)>, exact U returns it") {
    const auto traj = propagate(kCounter, TimeGrid(0.0, kTau / 2, 4000), {});
    const auto u_at = adiabatic_propagator(traj);
    const auto& f0 = traj.frames.front();
    CHECK(std::abs(overlap(f0.v_minus, Vec2(u_at.back() * f0.v_plus))) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(overlap(f0.v_plus, Vec2(traj.u_samples.back() * f0.v_plus))) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("missing gauge link") {
    auto traj = propagate(kCounter, TimeGrid(0.0, 1.0, 100), {});
    traj.frames[3].gauge_linked = false;
    CHECK_THROWS_AS(adiabatic_propagator(traj), InvalidArgument);
    const auto bare = integrate_schrodinger([](double) { return Mat2(pauli_matrices()[0]); }, TimeGrid(0, 1, 200), {});
    CHECK_THROWS_AS(adiabatic_propagator(bare), InvalidArgument);
  }
}

TEST_CASE("geometric phase") {
  const HamiltonianModel c = Constant(RealVec3(0.2, 0.1, -0.7));
  for (double b : geometric_phase(frames_along(c, TimeGrid(0, 5, 100)), Branch::plus)) CHECK(b == 0.0);

  // Equatorial loop: beta+ = -pi (1 - cos(pi/2)) = -pi modulo 2 pi.
  const auto frames = frames_along(kRotating, TimeGrid(0.0, kTau, 4000));
  const auto beta = geometric_phase(frames, Branch::plus);
  CHECK(std::abs(wrap(beta.back() + kPi)) <= 1e-6);
  const auto beta_minus = geometric_phase(frames, Branch::minus);
  CHECK(std::abs(wrap(beta_minus.back() - kPi)) <= 1e-6);

  // Second route: accumulate -arg<v_i|v_i+1> over the closed-form branch vectors.
  std::vector<Vec2> raw;
  for (const auto& f : frames) raw.push_back(f.branch_vector(Branch::plus));
  const auto beta_raw = geometric_phase_from_vectors(raw);
  for (std::size_t i = 0; i < beta.size(); ++i) CHECK(std::abs(beta_raw[i] - beta[i]) <= 1e-10);

  // Closed-loop value is gauge invariant: re-phase every interior sample.
  Gen gen(43);
  std::vector<Vec2> shuffled = raw;
  for (std::size_t i = 1; i + 1 < shuffled.size(); ++i) shuffled[i] *= gen.phase();
  shuffled.back() = shuffled.front();
  raw.back() = raw.front();
  const double loop = geometric_phase_from_vectors(raw).back();
  CHECK(std::abs(wrap(geometric_phase_from_vectors(shuffled).back() - loop)) <= 1e-6);
  CHECK(std::abs(wrap(loop + kPi)) <= 1e-6);
}

TEST_CASE("avron_hamiltonian") {
  const HamiltonianModel c = Constant(RealVec3(1, 2, 3));
  CHECK((avron_hamiltonian(c, 0.5) - hamiltonian(c, 0.5)).norm() <= 1e-15);

  // sin(omega0 t) = 0: Rhat = n and dRhat/dt = 2 n', so i[P', P] = (n x n').sigma = (2 pi / tau) sigma_z.
  const auto corr = pauli_decompose(Mat2(avron_hamiltonian(kCounter, kPi) - hamiltonian(kCounter, kPi)));
  CHECK((corr.r.real() - RealVec3(0, 0, 2 * kPi / kTau)).norm() <= 1e-14);
  // Rotating field: (pi / tau) sigma_z.
  const auto rot = pauli_decompose(Mat2(avron_hamiltonian(kRotating, 3.0) - hamiltonian(kRotating, 3.0)));
  CHECK((rot.r.real() - RealVec3(0, 0, kPi / kTau)).norm() <= 1e-14);

  Gen gen(47);
  for (int k = 0; k < 200; ++k) {
    const double t = gen.uniform(-20, 60);
    for (const auto& m : {kCounter, kRotating, HamiltonianModel(LandauZener(0.7, 0.4))}) {
      const Mat2 ha = avron_hamiltonian(m, t);
      CHECK(hermiticity_error(ha) <= 1e-14);
      const auto d = pauli_decompose(Mat2(ha - hamiltonian(m, t)));
      CHECK(std::abs(d.a0) <= 1e-15);
      CHECK(std::abs(d.r.real().dot(field_vector(m, t).r.normalized())) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(avron_hamiltonian(Constant(RealVec3::Zero()), 0.0), DegenerateSpectrum);
}

TEST_CASE("H_A transports the instantaneous eigenprojector exactly") {
  const auto avron = propagate_avron(kCounter, TimeGrid(0.0, kTau, 4000), {});
  const auto frames = frames_along(kCounter, avron.grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Vec2 moved = avron.u_samples[i] * frames.front().v_plus;
    worst = std::max(worst, 1.0 - std::abs(overlap(frames[i].v_plus, moved)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("reversed_frame_hamiltonian") {
  const auto traj = propagate(kCounter, TimeGrid(0.0, kTau / 2, 4000), {});
  CHECK((reversed_frame_hamiltonian(traj, kCounter, 0) + hamiltonian(kCounter, 0.0)).norm() == 0.0);
  for (std::size_t i = 0; i < traj.grid.size(); i += 37) {
    const Mat2 hbar = reversed_frame_hamiltonian(traj, kCounter, i);
    CHECK(hermiticity_error(hbar) <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat2> es(hbar, Eigen::EigenvaluesOnly);
    CHECK(std::abs(es.eigenvalues()(0) + traj.frames[i].e_plus) <= 1e-8);
    CHECK(std::abs(es.eigenvalues()(1) + traj.frames[i].e_minus) <= 1e-8);
  }
  // U(tau/2) = 1, so Hbar = -H there.
  CHECK((reversed_frame_hamiltonian(traj, kCounter, traj.grid.steps) + hamiltonian(kCounter, kTau / 2)).norm() <= 1e-6);
  CHECK_THROWS_AS(reversed_frame_hamiltonian(traj, kCounter, traj.grid.size()), std::out_of_range);
}

TEST_CASE("at_frame_hamiltonian_check") {
  SUBCASE("constant field") {
    const HamiltonianModel c = Constant(RealVec3(0.5, 0.0, 1.0));
    const auto traj = propagate(c, TimeGrid(0.0, 5.0, 500), {});
    const auto u_at = adiabatic_propagator(traj);
    CHECK(at_frame_hamiltonian_check(traj, u_at, c) <= 1e-8);
    // no coupling, so the second sum vanishes: diagonal in the initial eigenbasis
    const Mat2 h = at_frame_hamiltonian(traj, c, 250);
    const auto& f0 = traj.frames.front();
    CHECK(std::abs(overlap(f0.v_plus, Vec2(h * f0.v_minus))) <= 1e-14);
  }
  SUBCASE("counterexample, 4000 steps") {
    const auto traj = propagate(kCounter, TimeGrid(0.0, kTau / 2, 4000), {});
    const auto u_at = adiabatic_propagator(traj);
    CHECK(at_frame_hamiltonian_check(traj, u_at, kCounter) <= 1e-3);
    // t = tau/16, where dR/dt does not vanish
    const Mat2 h = at_frame_hamiltonian(traj, kCounter, 500);
    const auto& f0 = traj.frames.front();
    CHECK(std::abs(overlap(f0.v_plus, Vec2(h * f0.v_minus))) > 1e-3);
  }
  SUBCASE("shape mismatch") {
    const auto traj = propagate(kCounter, TimeGrid(0.0, 1.0, 100), {});
    std::vector<Mat2> short_at(3, Mat2::Identity());
    CHECK_THROWS_AS(at_frame_hamiltonian_check(traj, short_at, kCounter), InvalidArgument);
  }
}
