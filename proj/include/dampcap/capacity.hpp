#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "dampcap/channel.hpp"
#include "dampcap/error.hpp"
#include "dampcap/families.hpp"
#include "dampcap/numerics.hpp"

namespace dampcap {

namespace tolerance {
inline constexpr double circulant = 1e-9;
inline constexpr double winner_tie = 1e-12;
inline constexpr double prior_underflow = 1e-300;
}  // namespace tolerance

inline constexpr double default_ba_tolerance = 1e-9;
inline constexpr std::size_t default_ba_max_iterations = 100000;
// Prior entries above this count as letters in use.
inline constexpr double prior_support_threshold = 0.01;

inline void require_same_dim(const TransitionMatrix& q, const ProbVector& p) {
  if (q.dim() != p.size()) {
    throw dimension_error("prior has " + std::to_string(p.size()) +
                          " letters but the channel has " + std::to_string(q.dim()));
  }
}

// I(X;Y) in bits for channel q and input distribution p.
inline double mutual_information(const TransitionMatrix& q, const ProbVector& p) {
  require_same_dim(q, p);
  const std::size_t d = q.dim();
  std::vector<double> out(d, 0.0);
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m < d; ++m) out[m] += p[n] * q(m, n);
  double info = 0;
  for (std::size_t n = 0; n < d; ++n) {
    if (p[n] == 0) continue;
    for (std::size_t m = 0; m < d; ++m) {
      const double x = q(m, n);
      if (x == 0 || out[m] == 0) continue;
      info += p[n] * x * std::log2(x / out[m]);
    }
  }
  return std::max(info, 0.0);
}

struct BAResult {
  ProbVector prior;
  double information = 0;  // bits
  std::size_t iterations = 0;
  double gap = 0;  // bits; upper bound on capacity - information
  bool certified = false;
};

// Called once per iterate with (iteration, information in bits).
using BAObserver = std::function<void(std::size_t, double)>;

// Blahut-Arimoto iteration from the uniform prior. With
//   D_n = sum_m Q(m|n) ln(Q(m|n) / sum_l p_l Q(m|l)),
// the update is p_n <- p_n exp(D_n) / sum_l p_l exp(D_l). The capacity lies in
// [sum_n p_n D_n, max_n D_n], so iteration stops once that bracket is below tol.
inline BAResult blahut_arimoto(const TransitionMatrix& q, double tol = default_ba_tolerance,
                               std::size_t max_iter = default_ba_max_iterations,
                               const BAObserver& observer = {}) {
  if (!(tol > 0)) throw validation_error("Blahut-Arimoto tolerance must be positive");
  const std::size_t d = q.dim();

  std::vector<double> p(d, 1.0 / double(d));
  std::vector<double> out(d);
  std::vector<double> div(d);

  // Cache log Q(m|n) on the support.
  RealMatrix log_q(d);
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m < d; ++m) log_q(m, n) = q(m, n) > 0 ? std::log(q(m, n)) : 0.0;

  BAResult result;
  for (std::size_t iter = 0;; ++iter) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t n = 0; n < d; ++n) {
      if (p[n] == 0) continue;
      for (std::size_t m = 0; m < d; ++m) out[m] += p[n] * q(m, n);
    }
    double lower = 0;
    double upper = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < d; ++n) {
      double dn = 0;
      for (std::size_t m = 0; m < d; ++m) {
        const double x = q(m, n);
        if (x == 0 || out[m] == 0) continue;
        dn += x * (log_q(m, n) - std::log(out[m]));
      }
      div[n] = dn;
      lower += p[n] * dn;
      upper = std::max(upper, dn);
    }
    lower = std::max(lower, 0.0);
    const double gap = (upper - lower) / std::numbers::ln2;
    const double info = lower / std::numbers::ln2;
    if (observer) observer(iter, info);

    if (gap <= tol || iter >= max_iter) {
      result.information = info;
      result.iterations = iter;
      result.gap = std::max(gap, 0.0);
      result.certified = gap <= tol;
      break;
    }

    double norm = 0;
    for (std::size_t n = 0; n < d; ++n) {
      p[n] *= std::exp(div[n] - upper);
      norm += p[n];
    }
    for (double& x : p) {
      x /= norm;
      if (x < tolerance::prior_underflow) x = 0;
    }
  }
  result.prior = ProbVector(std::move(p));
  return result;
}

inline bool is_circulant(const TransitionMatrix& q, double tol = tolerance::circulant) {
  const std::size_t d = q.dim();
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m < d; ++m)
      if (std::abs(q(m, n) - q((m + d - n) % d, 0)) > tol) return false;
  return true;
}

// Capacity of a circulant channel: log2 d - H(column 0), achieved by the uniform prior.
inline double symmetric_capacity(const TransitionMatrix& q) {
  if (!is_circulant(q)) {
    throw validation_error("symmetric_capacity: transition matrix is not circulant");
  }
  const auto col = q.column(0);
  return std::max(std::log2(double(q.dim())) - detail::entropy_bits<double>(col), 0.0);
}

// chi_B = H(sum_n p_n Q(.|n)) - sum_n p_n H(Q(.|n)).
inline double holevo_direct(const TransitionMatrix& q, const ProbVector& prior) {
  require_same_dim(q, prior);
  const std::size_t d = q.dim();
  std::vector<double> out(d, 0.0);
  double conditional = 0;
  for (std::size_t n = 0; n < d; ++n) {
    const auto col = q.column(n);
    for (std::size_t m = 0; m < d; ++m) out[m] += prior[n] * col[m];
    conditional += prior[n] * detail::entropy_bits<double>(col);
  }
  for (double& x : out) x = std::clamp(x, 0.0, 1.0);
  return detail::entropy_bits<double>(out) - conditional;
}

// chi_B~ = H(w) - S(rho~_0). Every rho~_n is rho~_0 conjugated by a diagonal
// unitary, so they share one entropy.
inline double holevo_fourier(const AmplitudeMatrix& c) {
  return shannon_entropy(level_populations(c)) - von_neumann_entropy(fourier_output_state(c, 0));
}

enum class Basis { direct, fourier };

inline std::string_view to_string(Basis b) { return b == Basis::direct ? "direct" : "fourier"; }

inline Basis basis_from_string(std::string_view s) {
  if (s == "direct") return Basis::direct;
  if (s == "fourier") return Basis::fourier;
  throw validation_error("unknown basis \"" + std::string(s) + "\"");
}

struct CapacityReport {
  ChannelSpec spec;
  double i_direct = 0;
  double i_fourier = 0;
  double c_det = 0;
  Basis winner = Basis::fourier;
  double chi_direct = 0;
  double chi_fourier = 0;
  double delta = 0;
  ProbVector prior_direct;
  double prior_entropy = 0;
  std::size_t ba_iterations = 0;
  double ba_gap = 0;  // bits
  bool ba_certified = true;

  // Letters of the optimal direct prior above the reporting threshold.
  std::vector<std::size_t> prior_support(double threshold = prior_support_threshold) const {
    std::vector<std::size_t> used;
    for (std::size_t n = 0; n < prior_direct.size(); ++n)
      if (prior_direct[n] > threshold) used.push_back(n);
    return used;
  }
};

// Ties within 1e-12 go to the Fourier basis.
inline Basis pick_winner(double i_direct, double i_fourier) {
  return i_direct > i_fourier + tolerance::winner_tie ? Basis::direct : Basis::fourier;
}

inline CapacityReport detected_capacity(const ChannelSpec& spec,
                                        double tol = default_ba_tolerance,
                                        std::size_t max_iter = default_ba_max_iterations) {
  const TransitionMatrix q = build_transition(spec);
  const AmplitudeMatrix c = amplitudes_from_transition(q);
  const TransitionMatrix qt = fourier_transition(c);

  auto ba = blahut_arimoto(q, tol, max_iter);

  CapacityReport r;
  r.spec = spec;
  r.i_direct = ba.information;
  r.i_fourier = symmetric_capacity(qt);
  r.winner = pick_winner(r.i_direct, r.i_fourier);
  r.c_det = std::max(r.i_direct, r.i_fourier);
  r.chi_direct = holevo_direct(q, ba.prior);
  r.chi_fourier = holevo_fourier(c);
  r.delta = spec.dim > 1 ? (r.chi_fourier - r.c_det) / std::log2(double(spec.dim)) : 0.0;
  r.prior_entropy = shannon_entropy(ba.prior);
  r.prior_direct = std::move(ba.prior);
  r.ba_iterations = ba.iterations;
  r.ba_gap = ba.gap;
  r.ba_certified = ba.certified;
  return r;
}

}  // namespace dampcap
