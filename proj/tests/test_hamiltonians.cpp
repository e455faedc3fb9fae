#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "adia/hamiltonians.hpp"
#include "test_support.hpp"

using namespace adia;
using adia::testing::Gen;
using adia::testing::kPi;

namespace {

const HamiltonianModel kCounter = Counterexample(1.0, 20 * kPi);
const HamiltonianModel kRotating = RotatingField(1.0, 20 * kPi);

// Eigenvectors from a generic hermitian eigensolver: arbitrary phases, but
// independent of the closed-form branch formula.
std::pair<Vec2, Vec2> solver_eigenvectors(const Mat2& h) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(h);
  return {es.eigenvectors().col(1), es.eigenvectors().col(0)};
}

// i dU/dt U^dagger by central difference of the closed-form propagator.
Mat2 generator_from_propagator(const HamiltonianModel& m, double t, double h = 1e-5) {
  const Mat2 udot = (closed_form_unitary(m, t + h) - closed_form_unitary(m, t - h)) / (2 * h);
  return Complex(0, 1) * udot * closed_form_unitary(m, t).adjoint();
}

}  // namespace

TEST_CASE("model parameter validation") {
  CHECK_THROWS_AS(Counterexample(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Counterexample(1.0, -1.0), InvalidArgument);
  CHECK_THROWS_AS(RotatingField(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(LandauZener(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(LandauZener(1.0, INFINITY), InvalidArgument);
  CHECK_NOTHROW(LandauZener(1.0, 0.0));
}

TEST_CASE("field_vector examples") {
  auto f = field_vector(kCounter, 0.0);
  CHECK(f.a0 == 0.0);
  CHECK((f.r - RealVec3(1, 0, 0)).norm() <= 1e-15);

  f = field_vector(kCounter, 5 * kPi);
  CHECK((f.r - RealVec3(0, 1, 0)).norm() <= 1e-14);

  f = field_vector(LandauZener(1.0, 0.1), 20.0);
  CHECK((f.r - RealVec3(1, 0, -1)).norm() <= 1e-15);
}

TEST_CASE("counterexample field equals theta' n + cos sin n' + sin^2 n x n'") {
  const double omega0 = 1.0;
  const double tau = 20 * kPi;
  for (double t : {kPi / 2, 0.3, 7.1, 40.0}) {
    const double th = omega0 * t;
    const double phi = 2 * kPi * t / tau;
    const RealVec3 n(std::cos(phi), std::sin(phi), 0);
    const RealVec3 ndot = (2 * kPi / tau) * RealVec3(-std::sin(phi), std::cos(phi), 0);
    const RealVec3 r = omega0 * n + std::cos(th) * std::sin(th) * ndot + std::sin(th) * std::sin(th) * n.cross(ndot);
    const auto p = pauli_decompose(hamiltonian(kCounter, t));
    CHECK((p.r.real() - r).norm() <= 1e-12);
    CHECK(p.r.imag().norm() == 0.0);
  }
}

TEST_CASE("property: built-in Hamiltonians are hermitian and traceless") {
  Gen gen(5);
  const HamiltonianModel models[] = {kCounter, kRotating, LandauZener(1.0, 0.05), Constant(RealVec3(0.1, 0.2, 0.3))};
  for (const auto& m : models) {
    for (int k = 0; k < 100; ++k) {
      const Mat2 h = hamiltonian(m, gen.uniform(-50, 50));
      CHECK(hermiticity_error(h) == 0.0);
      CHECK(std::abs(h.trace()) == 0.0);
    }
  }
}

TEST_CASE("field_derivative") {
  CHECK(field_derivative(Constant(RealVec3(1, 2, 3)), 4.0).norm() == 0.0);
  for (double t : {-30.0, 0.0, 12.5}) {
    CHECK((field_derivative(LandauZener(1.0, 0.3), t) - RealVec3(0, 0, -0.15)).norm() == 0.0);
  }
  Gen gen(9);
  for (const auto& m : {kCounter, kRotating}) {
    for (int k = 0; k < 50; ++k) {
      const double t = gen.uniform(0, 70);
      const double h = 1e-5;
      const RealVec3 fd = (field_vector(m, t + h).r - field_vector(m, t - h).r) / (2 * h);
      const RealVec3 an = field_derivative(m, t);
      CHECK((fd - an).norm() <= 1e-6 * std::max(1.0, an.norm()));
    }
  }
}

TEST_CASE("closed_form_unitary") {
  CHECK((closed_form_unitary(kCounter, 0.0) - Mat2::Identity()).norm() <= 1e-15);
  CHECK((closed_form_unitary(kCounter, 10 * kPi) - Mat2::Identity()).norm() <= 1e-14);
  CHECK((closed_form_unitary(kRotating, 0.0) - Mat2::Identity()).norm() <= 1e-15);
  CHECK_THROWS_AS(closed_form_unitary(LandauZener(1.0, 1.0), 0.0), UnsupportedModel);
  CHECK_THROWS_AS(closed_form_unitary(Constant(RealVec3(0, 0, 1)), 0.0), UnsupportedModel);
  CHECK(has_closed_form_unitary(kCounter));
  CHECK_FALSE(has_closed_form_unitary(LandauZener(1.0, 1.0)));
}

TEST_CASE("property: H = i dU/dt U^dagger for the closed-form propagators") {
  Gen gen(13);
  for (const auto& m : {kCounter, kRotating}) {
    for (int k = 0; k < 50; ++k) {
      const double t = gen.uniform(0, 63);
      CHECK((generator_from_propagator(m, t) - hamiltonian(m, t)).norm() <= 1e-6);
      CHECK(unitarity_error(closed_form_unitary(m, t)) <= 1e-12);
    }
  }
}

TEST_CASE("spectral_frame examples") {
  auto f = spectral_frame(Constant(RealVec3(0, 0, 1)), 0.0);
  CHECK(f.e_plus == 1.0);
  CHECK(f.e_minus == -1.0);
  CHECK((f.v_plus - Vec2(1, 0)).norm() <= 1e-15);

  // E+ = sqrt(theta'^2 + sin^2(theta) |n'|^2) with |n'| = 2 pi / tau = 0.1.
  f = spectral_frame(kCounter, kPi / 2);
  CHECK(f.e_plus == doctest::Approx(std::sqrt(1.01)).epsilon(1e-13));
  CHECK(f.e_plus == doctest::Approx(1.004987562112089).epsilon(1e-13));

  f = spectral_frame(Constant(RealVec3(1, 0, 0)), 0.0);
  CHECK(std::abs(overlap(f.v_plus, Vec2(Vec2(1, 1) / std::sqrt(2.0)))) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(spectral_frame(Constant(RealVec3::Zero()), 0.0), DegenerateSpectrum);
  CHECK_THROWS_AS(spectral_frame(Constant(RealVec3(1e-13, 0, 0)), 0.0), DegenerateSpectrum);
}

TEST_CASE("property: spectral residual, orthogonality and ordering on random fields") {
  Gen gen(17);
  for (int k = 0; k < 1000; ++k) {
    RealVec3 r = gen.vec3(3.0);
    if (k % 10 == 0) r.z() = -std::abs(r.z());  // exercise both branches
    if (k % 13 == 0) r = RealVec3(0, 0, -gen.uniform(0.5, 2.0));  // south pole
    const double a0 = gen.uniform(-1, 1);
    const auto f = spectral_frame_from_field(0.0, a0, r);
    const Mat2 h = pauli_compose(a0, r);
    CHECK(f.e_plus >= f.e_minus);
    CHECK((h * f.v_plus - f.e_plus * f.v_plus).norm() <= 1e-10);
    CHECK((h * f.v_minus - f.e_minus * f.v_minus).norm() <= 1e-10);
    CHECK(std::abs(overlap(f.v_plus, f.v_minus)) <= 1e-10);
    CHECK(is_normalized(f.v_plus));
  }
}

TEST_CASE("parallel-transport gauge keeps successive overlaps real positive") {
  const HamiltonianModel lz = LandauZener(1.0, 0.2);  // R_z changes sign: branch switch
  for (const auto* m : {&kCounter, &lz}) {
    SpectralFrame prev = spectral_frame(*m, -10.0);
    for (int i = 1; i <= 2000; ++i) {
      const auto next = spectral_frame(*m, -10.0 + 0.01 * i, prev);
      CHECK(next.gauge_linked);
      for (Branch b : {Branch::plus, Branch::minus}) {
        const Complex ov = overlap(prev.vector(b), next.vector(b));
        CHECK(std::abs(ov.imag()) <= 1e-12);
        CHECK(ov.real() > 0.99);
        // stored vector = exp(i gauge_phase) * closed-form branch vector
        const auto raw = branch_eigenvectors(next.field);
        const Vec2& rv = b == Branch::plus ? raw.first : raw.second;
        CHECK((next.branch_vector(b) - rv).norm() <= 1e-12);
      }
      prev = next;
    }
  }
}

TEST_CASE("coupling_element") {
  const HamiltonianModel c = Constant(RealVec3(0.3, -0.2, 1.0));
  CHECK(std::abs(coupling_element(c, 1.0, spectral_frame(c, 1.0))) == 0.0);

  // Forward-difference oracle with solver eigenvectors: |<E+(t)|E-(t+h)>| / h.
  auto fd_coupling = [](const HamiltonianModel& m, double t) {
    const double h = 1e-6;
    const auto [p0, m0] = solver_eigenvectors(hamiltonian(m, t));
    const auto [p1, m1] = solver_eigenvectors(hamiltonian(m, t + h));
    (void)m0;
    (void)p1;
    return std::abs(overlap(p0, m1)) / h;
  };

  // sin(omega0 t) = 0: frozen from the oracle, |dR_perp/dt| / (2|R|) = 0.2 / 2.
  const double at_pi = std::abs(coupling_element(kCounter, kPi, spectral_frame(kCounter, kPi)));
  CHECK(at_pi == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(fd_coupling(kCounter, kPi) == doctest::Approx(0.1).epsilon(1e-5));

  Gen gen(23);
  for (const auto& m : {kCounter, kRotating, HamiltonianModel(LandauZener(1.0, 0.5))}) {
    for (int k = 0; k < 40; ++k) {
      const double t = gen.uniform(-10, 60);
      const double c_lib = std::abs(coupling_element(m, t, spectral_frame(m, t)));
      CHECK(std::abs(c_lib - fd_coupling(m, t)) <= 1e-5);
    }
  }
}

TEST_CASE("property: |coupling_element| is invariant under eigenvector re-phasing") {
  Gen gen(29);
  for (int k = 0; k < 200; ++k) {
    const double t = gen.uniform(0, 63);
    auto f = spectral_frame(kCounter, t);
    const double before = std::abs(coupling_element(kCounter, t, f));
    f.v_plus *= gen.phase();
    f.v_minus *= gen.phase();
    CHECK(std::abs(std::abs(coupling_element(kCounter, t, f)) - before) <= 1e-14);
  }
}

TEST_CASE("adiabaticity_ratio") {
  CHECK(adiabaticity_ratio(Constant(RealVec3(0, 1, 0)), 3.0) == 0.0);

  const double tau = 20 * kPi;
  double worst = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    worst = std::max(worst, adiabaticity_ratio(kCounter, tau * i / 20000.0));
  }
  // Peak value 1/20 reached wherever sin(omega0 t) = 0 (high-precision sweep).
  CHECK(worst == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(worst <= 0.05 + 1e-12);

  // Rotating field: |omega0 n'| / (4 omega0^2) = pi / (2 tau omega0) everywhere.
  for (double t : {0.0, 11.0, 40.0}) {
    CHECK(adiabaticity_ratio(kRotating, t) == doctest::Approx(kPi / (2 * tau)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(adiabaticity_ratio(Constant(RealVec3::Zero()), 0.0), DegenerateSpectrum);
}

TEST_CASE("tabulated model format") {
  std::stringstream good;
  good << "# adia-model v1\n";
  for (int i = 0; i <= 40; ++i) {
    const double t = -10.0 + 0.5 * i;
    good << t << " 0.25 1.0 0.0 " << (-0.05 * t) << "\n";
  }
  const Tabulated tab = parse_tabulated_model(good);
  const HamiltonianModel m = tab;
  const HamiltonianModel lz = LandauZener(1.0, 0.1);
  Gen gen(31);
  for (int k = 0; k < 100; ++k) {
    const double t = gen.uniform(-10, 10);
    const auto f = field_vector(m, t);
    CHECK(f.a0 == doctest::Approx(0.25).epsilon(1e-14));
    CHECK((f.r - field_vector(lz, t).r).norm() <= 1e-12);
    CHECK((field_derivative(m, t) - field_derivative(lz, t)).norm() <= 1e-6);
  }
  const auto frame = spectral_frame(m, 0.0);
  CHECK(frame.e_plus == doctest::Approx(1.25));
  CHECK(frame.e_minus == doctest::Approx(-0.75));
  CHECK_THROWS_AS(field_vector(m, 10.5), InvalidArgument);

  std::stringstream no_header("0 0 1 0 0\n1 0 1 0 0\n");
  CHECK_THROWS_AS(parse_tabulated_model(no_header), InvalidArgument);
  std::stringstream bad_line("# adia-model v1\n0 0 1 0\n");
  CHECK_THROWS_AS(parse_tabulated_model(bad_line), InvalidArgument);
  std::stringstream uneven("# adia-model v1\n0 0 1 0 0\n1 0 1 0 0\n3 0 1 0 0\n");
  CHECK_THROWS_AS(parse_tabulated_model(uneven), InvalidArgument);
  std::stringstream single("# adia-model v1\n0 0 1 0 0\n");
  CHECK_THROWS_AS(parse_tabulated_model(single), InvalidArgument);
}

TEST_CASE("tabulated cubic interpolation reproduces smooth fields") {
  std::stringstream in;
  in.precision(17);
  in << "# adia-model v1\n";
  for (int i = 0; i <= 400; ++i) {
    const double t = 0.05 * i;
    const auto f = field_vector(kCounter, t);
    in << t << ' ' << f.a0 << ' ' << f.r.x() << ' ' << f.r.y() << ' ' << f.r.z() << '\n';
  }
  const HamiltonianModel m = parse_tabulated_model(in);
  for (double t : {0.5, 3.33, 9.87, 17.2}) {
    CHECK((field_vector(m, t).r - field_vector(kCounter, t).r).norm() <= 1e-4);
    CHECK((field_derivative(m, t) - field_derivative(kCounter, t)).norm() <= 5e-3);
  }
}
