#pragma once

// Independent reference constructions for tests. Nothing here calls into the
// library's numerical code: operators are built from raw ladder matrices and
// exponentiated with Eigen's Pade scaling-and-squaring expm.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

inline Matrix annihilation(Eigen::Index dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline Matrix number(Eigen::Index dim) {
  Matrix n = Matrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

inline Matrix expm(const Matrix& m) { return m.exp(); }

/// exp(alpha a^dag - alpha^* a) on `big` levels, cropped to dim x dim.
inline Matrix displacement(complex alpha, Eigen::Index dim, Eigen::Index big) {
  const Matrix a = annihilation(big);
  const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return expm(gen).topLeftCorner(dim, dim);
}

/// exp((xi^* a^2 - xi a^dag^2) / 2) on `big` levels, cropped.
inline Matrix squeeze(complex xi, Eigen::Index dim, Eigen::Index big) {
  const Matrix a = annihilation(big);
  const Matrix gen = 0.5 * (std::conj(xi) * a * a - xi * a.adjoint() * a.adjoint());
  return expm(gen).topLeftCorner(dim, dim);
}

/// e^{-|a|^2/2} a^n / sqrt(n!) by running products.
inline Vector coherent(complex alpha, Eigen::Index dim) {
  Vector c(dim);
  complex term = std::exp(-0.5 * std::norm(alpha));
  for (Eigen::Index n = 0; n < dim; ++n) {
    c(n) = term;
    term *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return c;
}

inline Vector fock(Eigen::Index n, Eigen::Index dim) {
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return v;
}

inline Matrix parity(Eigen::Index dim) {
  Matrix p = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 0; n < dim; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return p;
}

inline Matrix even_projector(Eigen::Index dim) {
  return 0.5 * (Matrix::Identity(dim, dim) + parity(dim));
}

/// D(alpha) P+ D(alpha)^dag computed on a padded space then cropped.
inline Matrix displaced_even(complex alpha, Eigen::Index dim, Eigen::Index big) {
  const Matrix d = displacement(alpha, big, big);
  return (d * even_projector(big) * d.adjoint()).topLeftCorner(dim, dim);
}

/// E_k = sqrt((1-eta)^k / k!) eta^{n/2} a^k as a plain matrix product.
inline Matrix kraus(double eta, int k, Eigen::Index dim) {
  const Matrix a = annihilation(dim);
  Matrix ak = Matrix::Identity(dim, dim);
  for (int i = 0; i < k; ++i) ak = (ak * a).eval();
  Matrix damp = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 0; n < dim; ++n) damp(n, n) = std::pow(eta, 0.5 * static_cast<double>(n));
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return std::sqrt(std::pow(1.0 - eta, k) / fact) * damp * ak;
}

inline Matrix apply_loss(const Matrix& rho, double eta) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (int k = 0; k < rho.rows(); ++k) {
    const Matrix e = kraus(eta, k, rho.rows());
    out += e * rho * e.adjoint();
  }
  return out;
}

/// x^(theta) = (a e^{-i theta} + a^dag e^{i theta}) / 2.
inline Matrix quadrature(double theta, Eigen::Index dim) {
  const Matrix a = annihilation(dim);
  return 0.5 * (a * std::polar(1.0, -theta) + a.adjoint() * std::polar(1.0, theta));
}

/// Var(x^(theta)) from explicit operator moments on a state padded with
/// two extra zero levels so that x^2 is exact on its support.
inline double variance(const Vector& psi, double theta) {
  const Eigen::Index dim = psi.size() + 2;
  Vector v = Vector::Zero(dim);
  v.head(psi.size()) = psi / psi.norm();
  const Matrix x = quadrature(theta, dim);
  const complex m1 = v.dot(x * v);
  const complex m2 = v.dot(x * x * v);
  return (m2 - m1 * m1).real();
}

/// (2/pi) Tr[rho D(alpha) Pi D(alpha)^dag] on a padded space.
inline double wigner(const Matrix& rho, complex alpha, Eigen::Index big) {
  Matrix padded = Matrix::Zero(big, big);
  padded.topLeftCorner(rho.rows(), rho.cols()) = rho;
  const Matrix d = displacement(alpha, big, big);
  return 2.0 / kPi * (padded * d * parity(big) * d.adjoint()).trace().real();
}

/// Analytic squeezed vacuum amplitudes via a two-term recurrence
/// c_{2n+2} = -e^{i phase} tanh r sqrt((2n+1)/(2n+2)) c_{2n}.
inline Vector squeezed_vacuum(double r, double phase, Eigen::Index dim) {
  Vector c = Vector::Zero(dim);
  c(0) = 1.0 / std::sqrt(std::cosh(r));
  const complex step = -std::polar(std::tanh(r), phase);
  for (Eigen::Index n = 2; n < dim; n += 2)
    c(n) = c(n - 2) * step * std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
  return c;
}

inline double pure_fidelity(const Vector& a, const Vector& b) {
  return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 via Hermitian eigensolves.
inline double uhlmann(const Matrix& a, const Matrix& b) {
  auto psd_sqrt = [](const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Matrix(es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint());
  };
  const Matrix sa = psd_sqrt(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sa * b * sa);
  const double tr = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return tr * tr;
}

/// Post-selected even-parity run from vacuum using padded expm projectors.
struct Run {
  Vector state;
  std::vector<double> probabilities;
};

inline Run run_projectors(const std::vector<complex>& points, Eigen::Index dim, Eigen::Index big) {
  Run out;
  out.state = fock(0, dim);
  for (const complex& alpha : points) {
    const Vector next = displaced_even(alpha, dim, big) * out.state;
    const double p = next.squaredNorm();
    out.probabilities.push_back(p);
    out.state = next / std::sqrt(p);
  }
  return out;
}

}  // namespace oracle
