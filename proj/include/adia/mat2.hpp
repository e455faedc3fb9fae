#pragma once

// Complex 2x2 linear algebra for two-level systems, built on fixed-size Eigen
// types. Everything here is a pure function over values.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include <array>
#include <cmath>
#include <complex>

#include "adia/errors.hpp"
#include "adia/tolerances.hpp"

namespace adia {

template <typename Scalar>
using ComplexT = std::complex<Scalar>;
template <typename Scalar>
using Mat2T = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar>
using Vec2T = Eigen::Matrix<std::complex<Scalar>, 2, 1>;
template <typename Scalar>
using RealVec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using ComplexVec3T = Eigen::Matrix<std::complex<Scalar>, 3, 1>;

using Complex = ComplexT<double>;
using Mat2 = Mat2T<double>;
using Vec2 = Vec2T<double>;
using RealVec3 = RealVec3T<double>;
using ComplexVec3 = ComplexVec3T<double>;

/// sigma_x, sigma_y, sigma_z.
template <typename Scalar = double>
const std::array<Mat2T<Scalar>, 3>& pauli_matrices() {
  using C = ComplexT<Scalar>;
  static const std::array<Mat2T<Scalar>, 3> sigma = [] {
    std::array<Mat2T<Scalar>, 3> s;
    s[0] << C(0), C(1), C(1), C(0);
    s[1] << C(0), C(0, -1), C(0, 1), C(0);
    s[2] << C(1), C(0), C(0), C(-1);
    return s;
  }();
  return sigma;
}

/// Pauli coefficients of a general 2x2 matrix: m = a0 * 1 + r . sigma.
template <typename Scalar>
struct PauliComponents {
  ComplexT<Scalar> a0;
  ComplexVec3T<Scalar> r;
};

/// Builds a0 * 1 + r . sigma. Throws InvalidArgument on non-finite input.
template <typename Scalar>
Mat2T<Scalar> pauli_compose(Scalar a0, const RealVec3T<Scalar>& r) {
  if (!std::isfinite(a0) || !r.allFinite()) {
    throw InvalidArgument("pauli_compose: non-finite input");
  }
  using C = ComplexT<Scalar>;
  Mat2T<Scalar> m;
  m << C(a0 + r.z()), C(r.x(), -r.y()), C(r.x(), r.y()), C(a0 - r.z());
  return m;
}

template <typename Scalar>
Mat2T<Scalar> pauli_compose(const ComplexT<Scalar>& a0, const ComplexVec3T<Scalar>& r) {
  using C = ComplexT<Scalar>;
  const C i(0, 1);
  Mat2T<Scalar> m;
  m << a0 + r.z(), r.x() - i * r.y(), r.x() + i * r.y(), a0 - r.z();
  return m;
}

template <typename Scalar>
PauliComponents<Scalar> pauli_decompose(const Mat2T<Scalar>& m) {
  using C = ComplexT<Scalar>;
  const C i(0, 1);
  const Scalar half(0.5);
  PauliComponents<Scalar> out;
  out.a0 = half * (m(0, 0) + m(1, 1));
  out.r.x() = half * (m(0, 1) + m(1, 0));
  out.r.y() = half * i * (m(0, 1) - m(1, 0));
  out.r.z() = half * (m(0, 0) - m(1, 1));
  return out;
}

/// exp(-i theta n.sigma) = cos(theta) 1 - i sin(theta) n.sigma, for unit n.
template <typename Scalar>
Mat2T<Scalar> su2_exponential(Scalar theta, const RealVec3T<Scalar>& n) {
  if (!std::isfinite(theta) || !n.allFinite() ||
      std::abs(n.norm() - Scalar(1)) > Scalar(tol::kUnitVector)) {
    throw InvalidArgument("su2_exponential: axis must be a finite unit vector");
  }
  using C = ComplexT<Scalar>;
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  Mat2T<Scalar> u;
  u << C(c, -s * n.z()), C(-s * n.y(), -s * n.x()), C(s * n.y(), -s * n.x()),
      C(c, s * n.z());
  return u;
}

/// <a|b>, conjugate-linear in the first slot.
template <typename Scalar>
ComplexT<Scalar> overlap(const Vec2T<Scalar>& a, const Vec2T<Scalar>& b) {
  return a.dot(b);
}

/// |a><a|.
template <typename Scalar>
Mat2T<Scalar> outer(const Vec2T<Scalar>& a) {
  return a * a.adjoint();
}

/// Frobenius norm of M^dagger M - 1.
template <typename Scalar>
Scalar unitarity_error(const Mat2T<Scalar>& m) {
  return (m.adjoint() * m - Mat2T<Scalar>::Identity()).norm();
}

template <typename Scalar>
Scalar hermiticity_error(const Mat2T<Scalar>& m) {
  return (m - m.adjoint()).norm();
}

template <typename Scalar>
bool is_hermitian(const Mat2T<Scalar>& m, Scalar tolerance = Scalar(tol::kHermitian)) {
  return hermiticity_error(m) <= tolerance * std::max(Scalar(1), m.norm());
}

template <typename Scalar>
bool is_unitary(const Mat2T<Scalar>& m, Scalar tolerance = Scalar(tol::kUnitary)) {
  return unitarity_error(m) <= tolerance;
}

template <typename Scalar>
bool is_normalized(const Vec2T<Scalar>& v, Scalar tolerance = Scalar(tol::kNormalized)) {
  return std::abs(v.squaredNorm() - Scalar(1)) <= tolerance;
}

/// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)) for 2x2 positive
/// semidefinite operators. For 2x2 matrices (Tr sqrt X)^2 = tr X + 2 sqrt(det X),
/// with tr X = tr(rho sigma) and det X = det(rho) det(sigma).
template <typename Scalar>
Scalar trace_sqrt_fidelity(const Mat2T<Scalar>& rho, const Mat2T<Scalar>& sigma) {
  const Scalar tr = std::max(Scalar(0), (rho * sigma).trace().real());
  const Scalar det = std::max(Scalar(0), rho.determinant().real() * sigma.determinant().real());
  return std::sqrt(tr + Scalar(2) * std::sqrt(det));
}

}  // namespace adia
