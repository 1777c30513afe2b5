#pragma once

#include <array>
#include <complex>

namespace mzweak::jones {

using Complex = std::complex<double>;

inline constexpr double kPredicateTol = 1e-10;
inline constexpr double kOrthogonalityTol = 1e-12;
inline constexpr double kNormalizationTol = 1e-9;
inline constexpr double kSingularValueCutoff = 1e-12;

/// Polarization state in the {|H>, |V>} basis.
struct JonesVector {
  Complex h{};
  Complex v{};

  static JonesVector horizontal() { return {1.0, 0.0}; }
  static JonesVector vertical() { return {0.0, 1.0}; }
  static JonesVector diagonal();       // |+> = (|H> + |V>)/sqrt(2)
  static JonesVector antidiagonal();   // |-> = (|H> - |V>)/sqrt(2)
  static JonesVector right_circular(); // (|H> - i|V>)/sqrt(2)
  static JonesVector left_circular();  // (|H> + i|V>)/sqrt(2)
  /// Linear polarization at `angle` radians from horizontal.
  static JonesVector linear(double angle);

  double norm_squared() const { return std::norm(h) + std::norm(v); }
  bool is_normalized(double tol = kNormalizationTol) const;
  JonesVector normalized() const;

  friend JonesVector operator+(const JonesVector& a, const JonesVector& b) { return {a.h + b.h, a.v + b.v}; }
  friend JonesVector operator-(const JonesVector& a, const JonesVector& b) { return {a.h - b.h, a.v - b.v}; }
  friend JonesVector operator*(Complex s, const JonesVector& a) { return {s * a.h, s * a.v}; }
};

/// <bra|ket>, conjugate-linear in the first argument.
Complex inner(const JonesVector& bra, const JonesVector& ket);

/// 2x2 complex operator, row-major in the {|H>, |V>} basis.
struct JonesMatrix {
  std::array<Complex, 4> m{};

  Complex operator()(int row, int col) const { return m[static_cast<std::size_t>(2 * row + col)]; }
  Complex& operator()(int row, int col) { return m[static_cast<std::size_t>(2 * row + col)]; }

  static JonesMatrix identity() { return {{1.0, 0.0, 0.0, 1.0}}; }
  static JonesMatrix zero() { return {}; }
  static JonesMatrix diag(Complex a, Complex d) { return {{a, 0.0, 0.0, d}}; }

  JonesMatrix adjoint() const;
  Complex trace() const { return m[0] + m[3]; }
  Complex det() const { return m[0] * m[3] - m[1] * m[2]; }
  double frobenius_norm() const;

  bool is_hermitian(double tol = kPredicateTol) const;
  bool is_unitary(double tol = kPredicateTol) const;
  /// Hermitian within `tol` and no eigenvalue below -tol.
  bool is_psd(double tol = kPredicateTol) const;

  friend JonesMatrix operator+(const JonesMatrix& a, const JonesMatrix& b);
  friend JonesMatrix operator-(const JonesMatrix& a, const JonesMatrix& b);
  friend JonesMatrix operator*(Complex s, const JonesMatrix& a);
  friend bool operator==(const JonesMatrix&, const JonesMatrix&) = default;
};

JonesMatrix matmul(const JonesMatrix& a, const JonesMatrix& b);
inline JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b) { return matmul(a, b); }
JonesVector operator*(const JonesMatrix& a, const JonesVector& x);

/// Largest entrywise modulus of a - b.
double max_abs_diff(const JonesMatrix& a, const JonesMatrix& b);

/// <psi|m|psi>. Throws NotNormalized unless |psi| = 1 within kNormalizationTol.
Complex expectation(const JonesMatrix& m, const JonesVector& psi);

/// Principal square root of a positive-semidefinite matrix. Throws NotPsd.
JonesMatrix matrix_sqrt_psd(const JonesMatrix& m, double tol = 1e-9);

struct PolarDecomposition {
  JonesMatrix u;    // unitary factor
  JonesMatrix r;    // sqrt(A^H A)
  double residual;  // ||A - U R||_F
};

/// A = U R. For singular A the unitary is completed on ker(R) with the
/// convention that each completed singular vector has its first non-zero
/// component real and positive; A = 0 gives U = I.
PolarDecomposition polar_decompose(const JonesMatrix& a);

/// <phi|r|psi> / <phi|psi>. Throws OrthogonalSelection when |<phi|psi>| < orthogonality_tol.
Complex weak_value(const JonesMatrix& r, const JonesVector& psi, const JonesVector& phi,
                   double orthogonality_tol = kOrthogonalityTol);

/// Every intermediate of z = <R>_w <phi|psi> with phi = U^H psi.
struct WeakValueChain {
  PolarDecomposition polar;
  JonesVector post_selection;
  Complex overlap;      // <phi|psi> = <psi|U|psi>
  Complex weak_value;   // <phi|R|psi> / <phi|psi>
  Complex expectation;  // weak_value * overlap
};

WeakValueChain weak_value_chain(const JonesMatrix& a, const JonesVector& psi,
                                double orthogonality_tol = kOrthogonalityTol);

/// <psi|A|psi> computed through the polar decomposition and the weak value of R.
Complex nonhermitian_expectation_via_weak(const JonesMatrix& a, const JonesVector& psi);

// Optical elements. Angles are fast-axis (or transmission-axis) angles in radians.
JonesMatrix retarder(double axis, double retardance);
JonesMatrix hwp(double theta);
JonesMatrix qwp(double theta);
JonesMatrix polarizer(double theta);
/// hwp(theta) * projector_h() = [[cos 2t, 0], [sin 2t, 0]].
JonesMatrix class_operator(double theta);

JonesMatrix pauli_x();
JonesMatrix pauli_y();
JonesMatrix pauli_z();
JonesMatrix projector_h();
JonesMatrix projector_v();
/// [[0, 0], [1, 0]]
JonesMatrix lowering();

}  // namespace mzweak::jones
