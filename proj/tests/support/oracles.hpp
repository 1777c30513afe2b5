#pragma once

/// Reference implementations used only by tests. Each one takes a different
/// route from the library code it checks: explicit index sums instead of
/// matrix helpers, Eigen's SVD instead of the closed-form 2x2 polar, plain
/// composite Simpson sums instead of adaptive Gauss-Kronrod, and position-space
/// derivatives instead of momentum-space integrals.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mzweak/jones.hpp"

namespace oracle {

using Complex = std::complex<double>;
using mzweak::jones::JonesMatrix;
using mzweak::jones::JonesVector;

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Linear algebra

inline JonesMatrix product(const JonesMatrix& a, const JonesMatrix& b) {
  JonesMatrix c = JonesMatrix::zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Complex s = 0.0;
      for (int k = 0; k < 2; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline JonesMatrix dagger(const JonesMatrix& a) {
  JonesMatrix c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c(i, j) = std::conj(a(j, i));
  return c;
}

inline std::array<Complex, 2> apply(const JonesMatrix& a, const JonesVector& x) {
  return {a(0, 0) * x.h + a(0, 1) * x.v, a(1, 0) * x.h + a(1, 1) * x.v};
}

/// <bra| M |ket> by explicit double sum.
inline Complex sandwich(const JonesVector& bra, const JonesMatrix& m, const JonesVector& ket) {
  const Complex b[2] = {bra.h, bra.v};
  const Complex k[2] = {ket.h, ket.v};
  Complex s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s += std::conj(b[i]) * m(i, j) * k[j];
  return s;
}

inline double frobenius(const JonesMatrix& a) {
  double s = 0.0;
  for (const auto& z : a.m) s += std::norm(z);
  return std::sqrt(s);
}

inline double max_diff(const JonesMatrix& a, const JonesMatrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(a.m[i] - b.m[i]));
  return d;
}

/// Polar factors from Eigen's SVD: A = W S V^H, R = V S V^H, U = W V^H.
struct PolarOracle {
  JonesMatrix u;
  JonesMatrix r;
};

inline PolarOracle polar_via_eigen(const JonesMatrix& a) {
  Eigen::Matrix2cd m;
  m << a(0, 0), a(0, 1), a(1, 0), a(1, 1);
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix2cd r = svd.matrixV() * svd.singularValues().asDiagonal() * svd.matrixV().adjoint();
  const Eigen::Matrix2cd u = svd.matrixU() * svd.matrixV().adjoint();
  PolarOracle out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out.u(i, j) = u(i, j);
      out.r(i, j) = r(i, j);
    }
  return out;
}

/// Smallest eigenvalue of a Hermitian 2x2 via the characteristic polynomial.
inline double min_eigenvalue_hermitian(const JonesMatrix& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double off = std::abs(m(0, 1));
  return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + off * off);
}

// ---------------------------------------------------------------------------
// Random inputs

class Random {
 public:
  explicit Random(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }

  /// Uniform in the complex unit disc.
  Complex in_disc() {
    const double r = std::sqrt(uniform());
    const double t = uniform(0.0, 2.0 * kPi);
    return std::polar(r, t);
  }

  JonesMatrix matrix() {
    JonesMatrix a;
    for (auto& z : a.m) z = in_disc();
    return a;
  }

  JonesVector state() {
    const Complex h{normal(), normal()};
    const Complex v{normal(), normal()};
    const double n = std::sqrt(std::norm(h) + std::norm(v));
    return {h / n, v / n};
  }

  JonesMatrix hermitian() {
    JonesMatrix a;
    a(0, 0) = normal();
    a(1, 1) = normal();
    a(0, 1) = Complex{normal(), normal()};
    a(1, 0) = std::conj(a(0, 1));
    return a;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Quadrature

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
  if (n % 2) ++n;
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

// ---------------------------------------------------------------------------
// Interferometer closed forms

/// 1/4 (1 + <R^2> + 2 |z| cos(arg z - eps)) for ideal arms.
inline double port_d_intensity(double r_sq, Complex z, double eps) {
  return 0.25 * (1.0 + r_sq + 2.0 * std::abs(z) * std::cos(std::arg(z) - eps));
}

/// Half-wave plate written out from its fast-axis angle.
inline JonesMatrix half_wave(double theta) {
  const double c = std::cos(2.0 * theta);
  const double s = std::sin(2.0 * theta);
  JonesMatrix m;
  m(0, 0) = c;
  m(0, 1) = s;
  m(1, 0) = s;
  m(1, 1) = -c;
  return m;
}

/// |cos 2t + sin 2t| / (2 |sin 2t|): weak value of Pi_H for |+> and H(t)|+>.
inline double weak_value_abs(double theta) {
  return std::abs(std::cos(2 * theta) + std::sin(2 * theta)) / (2.0 * std::abs(std::sin(2 * theta)));
}

/// Real (cos 2t + sin 2t) / (2 sin 2t).
inline double weak_value_h(double theta) {
  return (std::cos(2 * theta) + std::sin(2 * theta)) / (2.0 * std::sin(2 * theta));
}

// ---------------------------------------------------------------------------
// Fringe model

/// A0 exp(-(x-mu)^2 / 2 sigma^2) (1 + V cos(k (x - mu) + alpha)).
inline double fringe(double x, double a0, double mu, double sigma, double v, double k, double alpha) {
  const double d = x - mu;
  return a0 * std::exp(-d * d / (2 * sigma * sigma)) * (1.0 + v * std::cos(k * d + alpha));
}

inline std::vector<double> fringe_samples(std::size_t n, double a0, double mu, double sigma, double v, double k,
                                          double alpha) {
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = fringe(static_cast<double>(i), a0, mu, sigma, v, k, alpha);
  return y;
}

// ---------------------------------------------------------------------------
// Weak-measurement pointer

/// Amplitude psi(x) = c_u g(x) + c_d g(x - a) with g^2 a unit Gaussian of std sigma.
struct Pointer {
  Complex c_u;
  Complex c_d;
  double a;
  double sigma;

  Complex amplitude(double x) const {
    const double norm = std::pow(2.0 * kPi * sigma * sigma, -0.25);
    auto g = [&](double c) { return norm * std::exp(-(x - c) * (x - c) / (4.0 * sigma * sigma)); };
    return c_u * g(0.0) + c_d * g(a);
  }

  Complex derivative(double x) const {
    const double norm = std::pow(2.0 * kPi * sigma * sigma, -0.25);
    auto dg = [&](double c) {
      return -norm * (x - c) / (2.0 * sigma * sigma) * std::exp(-(x - c) * (x - c) / (4.0 * sigma * sigma));
    };
    return c_u * dg(0.0) + c_d * dg(a);
  }

  double density(double x) const { return std::norm(amplitude(x)); }

  double lo() const { return std::min(0.0, a) - 14.0 * sigma; }
  double hi() const { return std::max(0.0, a) + 14.0 * sigma; }

  double norm() const { return simpson([&](double x) { return density(x); }, lo(), hi(), 40000); }

  double centroid() const {
    return simpson([&](double x) { return x * density(x); }, lo(), hi(), 40000) / norm();
  }

  /// <p> = Im int psi* psi' dx / int |psi|^2 dx (hbar = 1).
  double momentum() const {
    return simpson([&](double x) { return std::imag(std::conj(amplitude(x)) * derivative(x)); }, lo(), hi(), 40000) /
           norm();
  }
};

}  // namespace oracle
