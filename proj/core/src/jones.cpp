#include "mzweak/jones.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mzweak/errors.hpp"

namespace mzweak::jones {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_normalized(const JonesVector& x, const char* name) {
  if (!x.is_normalized()) {
    throw NotNormalized(std::string(name) + " is not normalized (|x|^2 = " +
                        std::to_string(x.norm_squared()) + ")");
  }
}

// Vector orthogonal to a unit vector, with the completion phase convention.
JonesVector phase_fixed(JonesVector x) {
  const Complex lead = std::abs(x.h) > kSingularValueCutoff ? x.h : x.v;
  const double mag = std::abs(lead);
  if (mag == 0.0) return x;
  return (std::conj(lead) / mag) * x;
}

JonesVector orthogonal_complement(const JonesVector& x) {
  return phase_fixed({-std::conj(x.v), std::conj(x.h)});
}

JonesMatrix outer(const JonesVector& ket, const JonesVector& bra) {
  return {{ket.h * std::conj(bra.h), ket.h * std::conj(bra.v),
           ket.v * std::conj(bra.h), ket.v * std::conj(bra.v)}};
}

JonesMatrix gram(const JonesMatrix& a) {
  // A^H A with exactly conjugate off-diagonal entries.
  const Complex p = std::norm(a.m[0]) + std::norm(a.m[2]);
  const Complex q = std::conj(a.m[0]) * a.m[1] + std::conj(a.m[2]) * a.m[3];
  const Complex r = std::norm(a.m[1]) + std::norm(a.m[3]);
  return {{p, q, std::conj(q), r}};
}

}  // namespace

JonesVector JonesVector::diagonal() { return {kInvSqrt2, kInvSqrt2}; }
JonesVector JonesVector::antidiagonal() { return {kInvSqrt2, -kInvSqrt2}; }
JonesVector JonesVector::right_circular() { return {kInvSqrt2, Complex(0.0, -kInvSqrt2)}; }
JonesVector JonesVector::left_circular() { return {kInvSqrt2, Complex(0.0, kInvSqrt2)}; }

JonesVector JonesVector::linear(double angle) { return {std::cos(angle), std::sin(angle)}; }

bool JonesVector::is_normalized(double tol) const { return std::abs(norm_squared() - 1.0) <= tol; }

JonesVector JonesVector::normalized() const {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw NotNormalized("cannot normalize the zero vector");
  return Complex(1.0 / n) * *this;
}

Complex inner(const JonesVector& bra, const JonesVector& ket) {
  return std::conj(bra.h) * ket.h + std::conj(bra.v) * ket.v;
}

JonesMatrix JonesMatrix::adjoint() const {
  return {{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
}

double JonesMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& e : m) s += std::norm(e);
  return std::sqrt(s);
}

bool JonesMatrix::is_hermitian(double tol) const {
  return std::abs(m[0].imag()) <= tol && std::abs(m[3].imag()) <= tol &&
         std::abs(m[1] - std::conj(m[2])) <= tol;
}

bool JonesMatrix::is_unitary(double tol) const {
  return max_abs_diff(adjoint() * *this, identity()) <= tol;
}

bool JonesMatrix::is_psd(double tol) const {
  if (!is_hermitian(tol)) return false;
  const double a = m[0].real();
  const double d = m[3].real();
  const double half_gap = std::hypot(0.5 * (a - d), std::abs(0.5 * (m[1] + std::conj(m[2]))));
  const double smallest = 0.5 * (a + d) - half_gap;
  return smallest >= -tol;
}

JonesMatrix operator+(const JonesMatrix& a, const JonesMatrix& b) {
  JonesMatrix out;
  for (std::size_t i = 0; i < 4; ++i) out.m[i] = a.m[i] + b.m[i];
  return out;
}

JonesMatrix operator-(const JonesMatrix& a, const JonesMatrix& b) {
  JonesMatrix out;
  for (std::size_t i = 0; i < 4; ++i) out.m[i] = a.m[i] - b.m[i];
  return out;
}

JonesMatrix operator*(Complex s, const JonesMatrix& a) {
  JonesMatrix out;
  for (std::size_t i = 0; i < 4; ++i) out.m[i] = s * a.m[i];
  return out;
}

JonesMatrix matmul(const JonesMatrix& a, const JonesMatrix& b) {
  return {{a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
           a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
}

JonesVector operator*(const JonesMatrix& a, const JonesVector& x) {
  return {a.m[0] * x.h + a.m[1] * x.v, a.m[2] * x.h + a.m[3] * x.v};
}

double max_abs_diff(const JonesMatrix& a, const JonesMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a.m[i] - b.m[i]));
  return worst;
}

Complex expectation(const JonesMatrix& m, const JonesVector& psi) {
  require_normalized(psi, "psi");
  return inner(psi, m * psi);
}

JonesMatrix matrix_sqrt_psd(const JonesMatrix& m, double tol) {
  if (!m.is_psd(tol)) throw NotPsd("matrix_sqrt_psd: argument is not positive semidefinite");
  // Cayley-Hamilton: sqrt(M) = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M)).
  const Complex off = 0.5 * (m.m[1] + std::conj(m.m[2]));
  const JonesMatrix h{{m.m[0].real(), off, std::conj(off), m.m[3].real()}};
  const double s = std::sqrt(std::max(h.det().real(), 0.0));
  const double t2 = h.trace().real() + 2.0 * s;
  if (t2 <= 0.0) return JonesMatrix::zero();
  const double t = std::sqrt(t2);
  JonesMatrix root = Complex(1.0 / t) * (h + Complex(s) * JonesMatrix::identity());
  root.m[2] = std::conj(root.m[1]);
  return root;
}

PolarDecomposition polar_decompose(const JonesMatrix& a) {
  const double fro2 = std::norm(a.m[0]) + std::norm(a.m[1]) + std::norm(a.m[2]) + std::norm(a.m[3]);
  const Complex det = a.det();
  const double abs_det = std::abs(det);
  const double disc = std::sqrt(std::max(fro2 * fro2 - 4.0 * abs_det * abs_det, 0.0));
  const double sigma_max = std::sqrt(0.5 * (fro2 + disc));
  const double sigma_min = sigma_max > 0.0 ? abs_det / sigma_max : 0.0;

  const double t = std::sqrt(fro2 + 2.0 * abs_det);
  JonesMatrix r = JonesMatrix::zero();
  if (t > 0.0) {
    r = Complex(1.0 / t) * (gram(a) + Complex(abs_det) * JonesMatrix::identity());
    r.m[0] = r.m[0].real();
    r.m[3] = r.m[3].real();
    r.m[2] = std::conj(r.m[1]);
  }

  JonesMatrix u = JonesMatrix::identity();
  if (sigma_min >= kSingularValueCutoff) {
    const JonesMatrix adj_h{{std::conj(a.m[3]), -std::conj(a.m[2]), -std::conj(a.m[1]), std::conj(a.m[0])}};
    u = Complex(1.0 / t) * (a + (det / abs_det) * adj_h);
  } else if (sigma_max >= kSingularValueCutoff) {
    // Rank one: A ~ sigma_max w v^H. Complete both bases on the null directions.
    const JonesMatrix h = gram(a);
    const double lambda = sigma_max * sigma_max;
    const JonesVector c1{h.m[1], lambda - h.m[0].real()};
    const JonesVector c2{lambda - h.m[3].real(), h.m[2]};
    const JonesVector v1 = (c1.norm_squared() >= c2.norm_squared() ? c1 : c2).normalized();
    const JonesVector w1 = (a * v1).normalized();
    u = outer(w1, v1) + outer(orthogonal_complement(w1), orthogonal_complement(v1));
  }

  const double residual = (a - u * r).frobenius_norm();
  return {u, r, residual};
}

Complex weak_value(const JonesMatrix& r, const JonesVector& psi, const JonesVector& phi,
                   double orthogonality_tol) {
  require_normalized(psi, "psi");
  require_normalized(phi, "phi");
  const Complex overlap = inner(phi, psi);
  if (std::abs(overlap) < orthogonality_tol) {
    throw OrthogonalSelection("weak value undefined: |<phi|psi>| = " + std::to_string(std::abs(overlap)));
  }
  return inner(phi, r * psi) / overlap;
}

WeakValueChain weak_value_chain(const JonesMatrix& a, const JonesVector& psi, double orthogonality_tol) {
  require_normalized(psi, "psi");
  WeakValueChain chain;
  chain.polar = polar_decompose(a);
  chain.post_selection = chain.polar.u.adjoint() * psi;
  chain.overlap = inner(chain.post_selection, psi);
  chain.weak_value = weak_value(chain.polar.r, psi, chain.post_selection, orthogonality_tol);
  chain.expectation = chain.weak_value * chain.overlap;
  return chain;
}

Complex nonhermitian_expectation_via_weak(const JonesMatrix& a, const JonesVector& psi) {
  return weak_value_chain(a, psi).expectation;
}

JonesMatrix retarder(double axis, double retardance) {
  const double c = std::cos(axis);
  const double s = std::sin(axis);
  const Complex e = std::polar(1.0, retardance);
  const Complex off = (1.0 - e) * s * c;
  return {{c * c + e * s * s, off, off, s * s + e * c * c}};
}

JonesMatrix hwp(double theta) {
  const double c = std::cos(2.0 * theta);
  const double s = std::sin(2.0 * theta);
  return {{c, s, s, -c}};
}

JonesMatrix qwp(double theta) { return retarder(theta, std::numbers::pi / 2.0); }

JonesMatrix polarizer(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {{c * c, s * c, s * c, s * s}};
}

JonesMatrix class_operator(double theta) {
  return {{std::cos(2.0 * theta), 0.0, std::sin(2.0 * theta), 0.0}};
}

JonesMatrix pauli_x() { return {{0.0, 1.0, 1.0, 0.0}}; }
JonesMatrix pauli_y() { return {{0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0}}; }
JonesMatrix pauli_z() { return {{1.0, 0.0, 0.0, -1.0}}; }
JonesMatrix projector_h() { return {{1.0, 0.0, 0.0, 0.0}}; }
JonesMatrix projector_v() { return {{0.0, 0.0, 0.0, 1.0}}; }
JonesMatrix lowering() { return {{0.0, 0.0, 1.0, 0.0}}; }

}  // namespace mzweak::jones
