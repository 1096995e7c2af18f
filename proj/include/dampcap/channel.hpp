#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "dampcap/error.hpp"
#include "dampcap/matrix.hpp"
#include "dampcap/numerics.hpp"

namespace dampcap {

inline constexpr std::size_t max_dimension = 64;

namespace tolerance {
inline constexpr double stochastic_column = 1e-9;
inline constexpr double amplitude_norm = 1e-9;
inline constexpr double kraus_completeness = 1e-10;
inline constexpr double imaginary_residue = 1e-10;
}  // namespace tolerance

namespace detail {

inline void check_dimension(std::size_t d) {
  if (d == 0 || d > max_dimension) {
    throw validation_error("dimension " + std::to_string(d) + " outside [1, " +
                           std::to_string(max_dimension) + "]");
  }
}

inline std::string at(std::size_t m, std::size_t n) {
  return "(" + std::to_string(m) + ", " + std::to_string(n) + ")";
}

// omega^k for k = 0..d-1 with omega = exp(2 pi i / d).
inline std::vector<std::complex<double>> roots_of_unity(std::size_t d) {
  std::vector<std::complex<double>> w(d);
  for (std::size_t k = 0; k < d; ++k) {
    w[k] = std::polar(1.0, 2 * std::numbers::pi * double(k) / double(d));
  }
  return w;
}

inline std::size_t mod(long long v, std::size_t d) {
  const auto dd = static_cast<long long>(d);
  return static_cast<std::size_t>(((v % dd) + dd) % dd);
}

}  // namespace detail

// Column-stochastic conditional probabilities: (m, n) is P(output m | input n).
class TransitionMatrix {
 public:
  TransitionMatrix() = default;

  explicit TransitionMatrix(RealMatrix q) : q_(std::move(q)) {
    const std::size_t d = q_.dim();
    detail::check_dimension(d);
    for (std::size_t n = 0; n < d; ++n) {
      double sum = 0;
      for (std::size_t m = 0; m < d; ++m) {
        double& x = q_(m, n);
        if (!(x >= -tolerance::probability_overshoot) || x > 1 + tolerance::probability_overshoot) {
          throw validation_error("transition entry " + detail::at(m, n) + " = " +
                                 std::to_string(x) + " outside [0, 1]");
        }
        x = std::clamp(x, 0.0, 1.0);
        sum += x;
      }
      if (std::abs(sum - 1) > tolerance::stochastic_column) {
        throw validation_error("transition column " + std::to_string(n) + " sums to " +
                               std::to_string(sum));
      }
    }
  }

  static TransitionMatrix identity(std::size_t d) {
    return TransitionMatrix(RealMatrix::identity(d));
  }

  std::size_t dim() const noexcept { return q_.dim(); }
  double operator()(std::size_t m, std::size_t n) const noexcept { return q_(m, n); }
  const RealMatrix& matrix() const noexcept { return q_; }

  std::vector<double> column(std::size_t n) const {
    std::vector<double> col(dim());
    for (std::size_t m = 0; m < dim(); ++m) col[m] = q_(m, n);
    return col;
  }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  RealMatrix q_;
};

// Real nonnegative damping amplitudes c(m, n), upper triangular with unit-norm columns.
class AmplitudeMatrix {
 public:
  AmplitudeMatrix() = default;

  explicit AmplitudeMatrix(RealMatrix c) : c_(std::move(c)) {
    const std::size_t d = c_.dim();
    detail::check_dimension(d);
    for (std::size_t n = 0; n < d; ++n) {
      double norm = 0;
      for (std::size_t m = 0; m < d; ++m) {
        const double x = c_(m, n);
        if (m > n && x != 0) {
          throw validation_error("amplitude " + detail::at(m, n) +
                                 " is nonzero below the diagonal (upward transition)");
        }
        if (!(x >= 0)) {
          throw validation_error("amplitude " + detail::at(m, n) + " is negative");
        }
        norm += x * x;
      }
      if (std::abs(norm - 1) > tolerance::amplitude_norm) {
        throw validation_error("amplitude column " + std::to_string(n) + " has squared norm " +
                               std::to_string(norm));
      }
    }
  }

  static AmplitudeMatrix identity(std::size_t d) { return AmplitudeMatrix(RealMatrix::identity(d)); }

  std::size_t dim() const noexcept { return c_.dim(); }
  double operator()(std::size_t m, std::size_t n) const noexcept { return c_(m, n); }
  const RealMatrix& matrix() const noexcept { return c_; }

 private:
  RealMatrix c_;
};

// Kraus operators A_0..A_{d-1} of a trace-preserving map.
class KrausSet {
 public:
  explicit KrausSet(std::vector<ComplexMatrix> ops) : ops_(std::move(ops)) {
    if (ops_.empty()) throw validation_error("empty Kraus set");
    const std::size_t d = ops_.front().dim();
    detail::check_dimension(d);
    ComplexMatrix sum(d);
    for (const auto& a : ops_) {
      if (a.dim() != d) throw dimension_error("Kraus operators have different dimensions");
      sum += a.adjoint() * a;
    }
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        if (std::abs(sum(r, c) - (r == c ? 1.0 : 0.0)) > tolerance::kraus_completeness) {
          throw validation_error("Kraus set is not trace preserving at " + detail::at(r, c));
        }
  }

  std::size_t dim() const noexcept { return ops_.front().dim(); }
  std::size_t size() const noexcept { return ops_.size(); }
  const ComplexMatrix& operator[](std::size_t k) const noexcept { return ops_[k]; }
  const std::vector<ComplexMatrix>& operators() const noexcept { return ops_; }

 private:
  std::vector<ComplexMatrix> ops_;
};

// Amplitudes c(m, n) = sqrt(Q(m|n)) for a damping transition matrix.
inline AmplitudeMatrix amplitudes_from_transition(const TransitionMatrix& q) {
  const std::size_t d = q.dim();
  RealMatrix c(d);
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m < d; ++m) {
      if (m > n) {
        if (q(m, n) != 0) {
          throw validation_error("transition " + detail::at(m, n) +
                                 " is nonzero: upward transitions are not a damping channel");
        }
        continue;
      }
      c(m, n) = std::sqrt(q(m, n));
    }
  // Columns of q sum to one within 1e-9; restore exact unit norm.
  for (std::size_t n = 0; n < d; ++n) {
    double norm = 0;
    for (std::size_t m = 0; m <= n; ++m) norm += c(m, n) * c(m, n);
    const double scale = 1 / std::sqrt(norm);
    for (std::size_t m = 0; m <= n; ++m) c(m, n) *= scale;
  }
  return AmplitudeMatrix(std::move(c));
}

// A_k has c(r - k, r) at (r - k, r).
inline KrausSet kraus_operators(const AmplitudeMatrix& c) {
  const std::size_t d = c.dim();
  std::vector<ComplexMatrix> ops;
  ops.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    ComplexMatrix a(d);
    for (std::size_t r = k; r < d; ++r) a(r - k, r) = c(r - k, r);
    ops.push_back(std::move(a));
  }
  return KrausSet(std::move(ops));
}

inline HermitianMatrix apply_channel(const KrausSet& kraus, const HermitianMatrix& rho) {
  if (rho.dim() != kraus.dim()) {
    throw dimension_error("state dimension " + std::to_string(rho.dim()) +
                          " does not match channel dimension " + std::to_string(kraus.dim()));
  }
  ComplexMatrix out(rho.dim());
  for (const auto& a : kraus.operators()) out += a * rho.matrix() * a.adjoint();
  return HermitianMatrix(out);
}

// Q(m|n) = c(m, n)^2.
inline TransitionMatrix direct_transition(const AmplitudeMatrix& c) {
  const std::size_t d = c.dim();
  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m <= n; ++m) q(m, n) = c(m, n) * c(m, n);
  return TransitionMatrix(std::move(q));
}

// Transition matrix for inputs and measurement in the Fourier basis
// |n~> = d^{-1/2} sum_j omega^{nj} |j>. The result is circulant, so only the d
// values q(k, 0) are evaluated:
//   q(k) = d^{-2} sum_l sum_{s<=l} sum_{t<=d-1-l+s} c(s, l) c(t, l-s+t) omega^{(t-s)k}.
inline TransitionMatrix fourier_transition(const AmplitudeMatrix& c) {
  const std::size_t d = c.dim();
  const auto omega = detail::roots_of_unity(d);
  const double norm = 1.0 / double(d * d);

  std::vector<double> shift(d);
  for (std::size_t k = 0; k < d; ++k) {
    std::complex<double> sum = 0;
    for (std::size_t l = 0; l < d; ++l)
      for (std::size_t s = 0; s <= l; ++s) {
        const double csl = c(s, l);
        if (csl == 0) continue;
        for (std::size_t t = 0; t + l <= d - 1 + s; ++t) {
          const long long diff = static_cast<long long>(t) - static_cast<long long>(s);
          sum += csl * c(t, l - s + t) * omega[detail::mod(diff * static_cast<long long>(k), d)];
        }
      }
    sum *= norm;
    if (std::abs(sum.imag()) > tolerance::imaginary_residue) {
      throw numerical_error("Fourier transition entry " + std::to_string(k) +
                            " has imaginary residue " + std::to_string(sum.imag()));
    }
    shift[k] = std::abs(sum.real()) < tolerance::probability_overshoot ? 0.0 : sum.real();
  }

  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m < d; ++m)
      q(m, n) = shift[detail::mod(static_cast<long long>(m) - static_cast<long long>(n), d)];
  return TransitionMatrix(std::move(q));
}

// |n~><n~| as a density matrix.
inline HermitianMatrix fourier_projector(std::size_t d, std::size_t n) {
  const auto omega = detail::roots_of_unity(d);
  ComplexMatrix p(d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t l = 0; l < d; ++l)
      p(j, l) = omega[detail::mod(static_cast<long long>(n * j) - static_cast<long long>(n * l), d)] /
                double(d);
  return HermitianMatrix(p);
}

// Brute force: prepare each Fourier state, push it through the Kraus map and
// measure in the Fourier basis.
inline TransitionMatrix fourier_transition_oracle(const KrausSet& kraus) {
  const std::size_t d = kraus.dim();
  const auto omega = detail::roots_of_unity(d);
  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n) {
    const auto out = apply_channel(kraus, fourier_projector(d, n));
    for (std::size_t m = 0; m < d; ++m) {
      // <m~| rho |m~> = d^{-1} sum_{j,l} omega^{-mj} rho(j, l) omega^{ml}
      std::complex<double> v = 0;
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t l = 0; l < d; ++l)
          v += omega[detail::mod(static_cast<long long>(m * l) - static_cast<long long>(m * j), d)] *
               out(j, l);
      q(m, n) = v.real() / double(d);
    }
  }
  return TransitionMatrix(std::move(q));
}

// rho~_n = E(|n~><n~|), entries (1/d) sum_t c(m, t) c(s, s+t-m) omega^{n(m-s)}.
inline HermitianMatrix fourier_output_state(const AmplitudeMatrix& c, std::size_t n) {
  const std::size_t d = c.dim();
  if (n >= d) {
    throw validation_error("Fourier level " + std::to_string(n) + " out of range for d = " +
                           std::to_string(d));
  }
  const auto omega = detail::roots_of_unity(d);
  ComplexMatrix rho(d);
  for (std::size_t m = 0; m < d; ++m)
    for (std::size_t s = 0; s < d; ++s) {
      double sum = 0;
      for (std::size_t t = m; t < d && t + s < d + m; ++t) sum += c(m, t) * c(s, s + t - m);
      const auto phase = omega[detail::mod(
          static_cast<long long>(n) * (static_cast<long long>(m) - static_cast<long long>(s)), d)];
      rho(m, s) = sum / double(d) * phase;
    }
  return HermitianMatrix(rho);
}

// w_m = (1/d) sum_{t >= m} c(m, t)^2: the diagonal of the Fourier-averaged output.
inline ProbVector level_populations(const AmplitudeMatrix& c) {
  const std::size_t d = c.dim();
  std::vector<double> w(d, 0.0);
  for (std::size_t m = 0; m < d; ++m) {
    for (std::size_t t = m; t < d; ++t) w[m] += c(m, t) * c(m, t);
    w[m] /= double(d);
  }
  return ProbVector(std::move(w));
}

}  // namespace dampcap
