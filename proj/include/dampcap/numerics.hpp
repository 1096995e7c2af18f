#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dampcap/error.hpp"
#include "dampcap/matrix.hpp"

namespace dampcap {

namespace tolerance {
inline constexpr double probability_sum = 1e-9;
inline constexpr double probability_overshoot = 1e-12;
inline constexpr double hermiticity = 1e-12;
inline constexpr double negative_eigenvalue = 1e-10;
inline constexpr double entropy_cutoff = 1e-15;
}  // namespace tolerance

// x log2 x with 0 log 0 = 0. Arguments below 1e-15 count as zero.
template <std::floating_point Real>
Real xlogx(Real x) {
  if (x < Real(-1e-12) || x > Real(1) + Real(1e-9) || std::isnan(x)) {
    throw validation_error("xlogx: argument " + std::to_string(x) + " outside [0, 1]");
  }
  if (x < Real(tolerance::entropy_cutoff)) return Real(0);
  return x * std::log2(x);
}

namespace detail {

// Shannon entropy in bits of an already-validated distribution.
template <std::floating_point Real>
Real entropy_bits(std::span<const Real> p) {
  Real h = 0;
  for (Real x : p) h -= xlogx(x);
  return h < Real(0) ? Real(0) : h;
}

// lgamma without touching the global signgam (std::lgamma is not reentrant on glibc).
inline double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

}  // namespace detail

// Discrete probability distribution. Sums within 1e-9 of one are renormalized,
// anything further off is rejected.
class ProbVector {
 public:
  ProbVector() = default;

  explicit ProbVector(std::vector<double> entries) : p_(std::move(entries)) {
    if (p_.empty()) throw validation_error("probability vector is empty");
    double sum = 0;
    for (double& x : p_) {
      if (!(x >= -tolerance::probability_overshoot) || x > 1 + tolerance::probability_overshoot) {
        throw validation_error("probability entry " + std::to_string(x) + " outside [0, 1]");
      }
      x = std::clamp(x, 0.0, 1.0);
      sum += x;
    }
    if (std::abs(sum - 1) > tolerance::probability_sum) {
      throw validation_error("probabilities sum to " + std::to_string(sum) + ", not 1");
    }
    for (double& x : p_) x /= sum;
  }

  static ProbVector uniform(std::size_t d) { return ProbVector(std::vector<double>(d, 1.0 / double(d))); }

  static ProbVector deterministic(std::size_t d, std::size_t index) {
    std::vector<double> v(d, 0.0);
    v.at(index) = 1.0;
    return ProbVector(std::move(v));
  }

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const noexcept { return p_[i]; }
  std::span<const double> values() const noexcept { return p_; }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> p_;
};

inline double shannon_entropy(const ProbVector& p) { return detail::entropy_bits(p.values()); }

// ln C(n, k); -inf when k is outside [0, n].
inline double log_binomial(long long n, long long k) {
  if (n < 0) throw validation_error("log_binomial: negative n");
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  return detail::log_gamma(double(n) + 1) - detail::log_gamma(double(k) + 1) -
         detail::log_gamma(double(n - k) + 1);
}

inline double log_beta(double a, double b) {
  if (!(a > 0) || !(b > 0)) {
    throw validation_error("log_beta: arguments must be positive");
  }
  return detail::log_gamma(a) + detail::log_gamma(b) - detail::log_gamma(a + b);
}

// Complex Hermitian matrix. Construction checks Hermiticity within 1e-12 and
// then stores the exactly-Hermitian part.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const ComplexMatrix& m) : m_(m.dim()) {
    const std::size_t d = m.dim();
    if (d == 0) throw validation_error("Hermitian matrix has dimension 0");
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = r; c < d; ++c) {
        const auto a = m(r, c);
        const auto b = std::conj(m(c, r));
        if (std::abs(a - b) > tolerance::hermiticity) {
          throw validation_error("matrix is not Hermitian at (" + std::to_string(r) + ", " +
                                 std::to_string(c) + ")");
        }
        const auto avg = 0.5 * (a + b);
        m_(r, c) = r == c ? std::complex<double>(avg.real(), 0.0) : avg;
        m_(c, r) = std::conj(m_(r, c));
      }
    }
  }

  std::size_t dim() const noexcept { return m_.dim(); }
  std::complex<double> operator()(std::size_t r, std::size_t c) const noexcept { return m_(r, c); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  double trace() const noexcept { return m_.trace().real(); }

 private:
  ComplexMatrix m_;
};

namespace jacobi {
inline constexpr double off_diagonal_threshold = 1e-12;
inline constexpr int max_sweeps = 100;
}  // namespace jacobi

// Eigenvalues by cyclic complex Jacobi rotations, sorted nonincreasing.
inline std::vector<double> hermitian_eigenvalues(const HermitianMatrix& h) {
  using cplx = std::complex<double>;
  ComplexMatrix a = h.matrix();
  const std::size_t d = a.dim();

  auto off_norm = [&] {
    double s = 0;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        if (r != c) s += std::norm(a(r, c));
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < jacobi::max_sweeps && off_norm() > jacobi::off_diagonal_threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag < 1e-300) continue;
        // Phase e^{i phi} of a_pq; rotating column q by e^{-i phi} makes a_pq real.
        const cplx phase = a(p, q) / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1 / std::hypot(t, 1.0);
        const double s = t * c;

        // U acts on the (p, q) plane: U_pp = c, U_pq = s, U_qp = -s e^{-i phi}, U_qq = c e^{-i phi}.
        const cplx uqp = -s * std::conj(phase);
        const cplx uqq = c * std::conj(phase);
        for (std::size_t k = 0; k < d; ++k) {  // A <- A U
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * c + akq * uqp;
          a(k, q) = akp * s + akq * uqq;
        }
        for (std::size_t k = 0; k < d; ++k) {  // A <- U^dagger A
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = c * apk + std::conj(uqp) * aqk;
          a(q, k) = s * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = app - t * mag;
        a(q, q) = aqq + t * mag;
      }
    }
  }
  if (off_norm() > jacobi::off_diagonal_threshold * std::max(1.0, std::sqrt(double(d)))) {
    throw numerical_error("Jacobi eigensolver did not converge in " +
                          std::to_string(jacobi::max_sweeps) + " sweeps");
  }

  std::vector<double> eig(d);
  for (std::size_t i = 0; i < d; ++i) eig[i] = a(i, i).real();
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

// Von Neumann entropy in bits of a density matrix.
inline double von_neumann_entropy(const HermitianMatrix& rho) {
  if (std::abs(rho.trace() - 1) > tolerance::probability_sum) {
    throw validation_error("density matrix trace is " + std::to_string(rho.trace()));
  }
  auto eig = hermitian_eigenvalues(rho);
  for (double& x : eig) {
    if (x < -tolerance::negative_eigenvalue) {
      throw validation_error("density matrix has eigenvalue " + std::to_string(x));
    }
    x = std::clamp(x, 0.0, 1.0);
  }
  return detail::entropy_bits<double>(eig);
}

}  // namespace dampcap
