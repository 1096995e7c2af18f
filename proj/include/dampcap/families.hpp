#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dampcap/channel.hpp"
#include "dampcap/error.hpp"
#include "dampcap/numerics.hpp"

namespace dampcap {

enum class Family {
  bosonic,
  hypergeometric,
  negative_hypergeometric,
  beta_binomial,
  geometric,
  constant_ratio,
  two_jump,
  lambda,
  v,
};

inline constexpr std::array all_families = {
    Family::bosonic,        Family::hypergeometric, Family::negative_hypergeometric,
    Family::beta_binomial,  Family::geometric,      Family::constant_ratio,
    Family::two_jump,       Family::lambda,         Family::v,
};

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::bosonic: return "bosonic";
    case Family::hypergeometric: return "hypergeometric";
    case Family::negative_hypergeometric: return "negative_hypergeometric";
    case Family::beta_binomial: return "beta_binomial";
    case Family::geometric: return "geometric";
    case Family::constant_ratio: return "constant_ratio";
    case Family::two_jump: return "two_jump";
    case Family::lambda: return "lambda";
    case Family::v: return "v";
  }
  return "?";
}

inline Family family_from_string(std::string_view name) {
  for (Family f : all_families)
    if (to_string(f) == name) return f;
  throw validation_error("unknown channel family \"" + std::string(name) + "\"");
}

// Scalar parameter keys, in the order used for reporting.
inline std::vector<std::string> family_parameter_keys(Family f) {
  switch (f) {
    case Family::bosonic:
    case Family::geometric:
    case Family::constant_ratio:
    case Family::lambda:
    case Family::v: return {"gamma"};
    case Family::hypergeometric:
    case Family::negative_hypergeometric: return {"M", "L"};
    case Family::beta_binomial: return {"alpha", "beta"};
    case Family::two_jump: return {"gamma1", "gamma2"};
  }
  return {};
}

inline bool is_integer_parameter(std::string_view key) { return key == "M" || key == "L"; }

// Families whose damping may vary per level (the "gammas" key).
inline bool accepts_level_gammas(Family f) {
  return f == Family::bosonic || f == Family::geometric || f == Family::constant_ratio ||
         f == Family::v;
}

struct ChannelSpec {
  Family family = Family::bosonic;
  std::size_t dim = 2;
  std::map<std::string, double> params;
  // Per-level damping gamma_n; when non-empty it replaces params["gamma"].
  std::vector<double> level_gammas;

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

namespace detail {

inline double param(const ChannelSpec& spec, const std::string& key) {
  auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    throw validation_error(std::string(to_string(spec.family)) + ": missing parameter \"" + key +
                           "\"");
  }
  return it->second;
}

inline long long integer_param(const ChannelSpec& spec, const std::string& key) {
  const double v = param(spec, key);
  if (v != std::floor(v) || std::abs(v) > 1e15) {
    throw validation_error("parameter \"" + key + "\" must be an integer");
  }
  return static_cast<long long>(v);
}

// gamma_n for n = 0..d-1 from a scalar or per-level list.
inline std::vector<double> broadcast(std::size_t d, std::span<const double> gammas) {
  if (gammas.size() == 1) return std::vector<double>(d, gammas.front());
  if (gammas.size() != d) {
    throw validation_error("expected 1 or " + std::to_string(d) + " damping values, got " +
                           std::to_string(gammas.size()));
  }
  return {gammas.begin(), gammas.end()};
}

inline void require_range(std::span<const double> gammas, double lo, double hi, const char* what) {
  for (std::size_t n = 0; n < gammas.size(); ++n) {
    const double g = gammas[n];
    if (!(g >= lo && g <= hi)) {
      throw validation_error(std::string(what) + ": gamma at level " + std::to_string(n) + " = " +
                             std::to_string(g) + " outside [" + std::to_string(lo) + ", " +
                             (std::isinf(hi) ? std::string("inf") : std::to_string(hi)) + "]");
    }
  }
}

// Columns computed entrywise (log space or closed forms) drift by round-off;
// renormalize small drift, refuse anything larger.
inline TransitionMatrix finalize_columns(RealMatrix q, const char* what) {
  const std::size_t d = q.dim();
  for (std::size_t n = 0; n < d; ++n) {
    double sum = 0;
    for (std::size_t m = 0; m < d; ++m) sum += q(m, n);
    if (std::abs(sum - 1) > tolerance::stochastic_column) {
      throw numerical_error(std::string(what) + ": column " + std::to_string(n) + " sums to " +
                            std::to_string(sum));
    }
    for (std::size_t m = 0; m < d; ++m) q(m, n) /= sum;
  }
  return TransitionMatrix(std::move(q));
}

// Weights g^{n-m} for m = 0..n normalized to one; at g = 1 this is uniform and
// needs no special casing.
inline void geometric_column(RealMatrix& q, std::size_t n, double g) {
  double sum = 0;
  double w = 1;
  for (std::size_t m = n + 1; m-- > 0;) {
    q(m, n) = w;
    sum += w;
    w *= g;
  }
  for (std::size_t m = 0; m <= n; ++m) q(m, n) /= sum;
}

}  // namespace detail

// Binomial decay: Q(m|n) = C(n,m) g_n^{n-m} (1-g_n)^m.
inline TransitionMatrix bosonic(std::size_t d, std::span<const double> gammas) {
  detail::check_dimension(d);
  const auto g = detail::broadcast(d, gammas);
  detail::require_range(g, 0.0, 1.0, "bosonic");
  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m <= n; ++m) {
      const double lc = log_binomial(static_cast<long long>(n), static_cast<long long>(m));
      q(m, n) = std::exp(lc) * std::pow(g[n], double(n - m)) * std::pow(1 - g[n], double(m));
    }
  return detail::finalize_columns(std::move(q), "bosonic");
}

inline TransitionMatrix bosonic(std::size_t d, double gamma) {
  return bosonic(d, std::span<const double>(&gamma, 1));
}

// Hypergeometric decay: Q(m|n) = C(M,m) C(L-M,n-m) / C(L,n).
inline TransitionMatrix hypergeometric(std::size_t d, long long M, long long L) {
  detail::check_dimension(d);
  if (M < 0 || M > L) throw validation_error("hypergeometric: need 0 <= M <= L");
  if (static_cast<long long>(d) - 1 > L) {
    throw validation_error("hypergeometric: need d - 1 <= L");
  }
  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n) {
    const auto nn = static_cast<long long>(n);
    for (long long m = 0; m <= nn; ++m) {
      const double lv = log_binomial(M, m) + log_binomial(L - M, nn - m) - log_binomial(L, nn);
      q(static_cast<std::size_t>(m), n) = std::isinf(lv) ? 0.0 : std::exp(lv);
    }
  }
  return detail::finalize_columns(std::move(q), "hypergeometric");
}

// Negative hypergeometric decay: Q(m|n) = C(m+M-1,m) C(L-M-m,n-m) / C(L,n).
inline TransitionMatrix negative_hypergeometric(std::size_t d, long long M, long long L) {
  detail::check_dimension(d);
  if (M < 1 || L < 1) throw validation_error("negative_hypergeometric: M and L must be positive");
  if (static_cast<long long>(d) - 1 > L - M) {
    throw validation_error("negative_hypergeometric: need d - 1 <= L - M");
  }
  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n) {
    const auto nn = static_cast<long long>(n);
    for (long long m = 0; m <= nn; ++m) {
      const double lv =
          log_binomial(m + M - 1, m) + log_binomial(L - M - m, nn - m) - log_binomial(L, nn);
      q(static_cast<std::size_t>(m), n) = std::isinf(lv) ? 0.0 : std::exp(lv);
    }
  }
  return detail::finalize_columns(std::move(q), "negative_hypergeometric");
}

// Beta-binomial decay: Q(m|n) = C(n,m) B(m+alpha, n-m+beta) / B(alpha, beta).
inline TransitionMatrix beta_binomial(std::size_t d, double alpha, double beta) {
  detail::check_dimension(d);
  if (!(alpha > 0) || !(beta > 0)) {
    throw validation_error("beta_binomial: alpha and beta must be positive");
  }
  // log B(alpha+m, beta+n-m) - log B(alpha, beta) as a sum of rising-factorial
  // log-ratios. Differencing log-gammas loses digits once alpha, beta are large.
  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m <= n; ++m) {
      double lv = log_binomial(static_cast<long long>(n), static_cast<long long>(m));
      for (std::size_t i = 0; i < m; ++i)
        lv += std::log((alpha + double(i)) / (alpha + beta + double(i)));
      for (std::size_t j = 0; j < n - m; ++j)
        lv += std::log((beta + double(j)) / (alpha + beta + double(m + j)));
      q(m, n) = std::exp(lv);
    }
  return detail::finalize_columns(std::move(q), "beta_binomial");
}

// Geometric decay: Q(m|n) proportional to g_n^{n-m} on m = 0..n.
inline TransitionMatrix geometric(std::size_t d, std::span<const double> gammas) {
  detail::check_dimension(d);
  const auto g = detail::broadcast(d, gammas);
  detail::require_range(g, 0.0, HUGE_VAL, "geometric");
  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n) detail::geometric_column(q, n, g[n]);
  return detail::finalize_columns(std::move(q), "geometric");
}

inline TransitionMatrix geometric(std::size_t d, double gamma) {
  return geometric(d, std::span<const double>(&gamma, 1));
}

// Diagonal entry of a constant-ratio column, (1 - 2g + g^{n+1}) / (1 - g),
// written as 1 - sum_{j=1..n} g^j so that g = 1 is not special.
inline double constant_ratio_diagonal(std::size_t n, double g) {
  double sum = 0;
  double p = 1;
  for (std::size_t j = 1; j <= n; ++j) {
    p *= g;
    sum += p;
  }
  return 1 - sum;
}

// Constant ratio between adjacent decay probabilities: Q(m|n) = g_n^{n-m} for m < n.
inline TransitionMatrix constant_ratio(std::size_t d, std::span<const double> gammas) {
  detail::check_dimension(d);
  const auto g = detail::broadcast(d, gammas);
  detail::require_range(g, 0.0, HUGE_VAL, "constant_ratio");
  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n) {
    const double diag = constant_ratio_diagonal(n, g[n]);
    if (diag < 0) {
      throw validation_error("constant_ratio: gamma = " + std::to_string(g[n]) +
                             " is not admissible at level " + std::to_string(n) +
                             " (diagonal entry " + std::to_string(diag) + ")");
    }
    for (std::size_t m = 0; m < n; ++m) q(m, n) = std::pow(g[n], double(n - m));
    q(n, n) = diag;
  }
  return detail::finalize_columns(std::move(q), "constant_ratio");
}

inline TransitionMatrix constant_ratio(std::size_t d, double gamma) {
  return constant_ratio(d, std::span<const double>(&gamma, 1));
}

// Largest gamma with every constant-ratio diagonal nonnegative in dimension d.
inline double constant_ratio_max_gamma(std::size_t d) {
  if (d <= 2) return 1.0;
  // 1 - sum_{j<=d-1} g^j is decreasing on g >= 0, so bisect its root.
  double lo = 0, hi = 1;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (constant_ratio_diagonal(d - 1, mid) >= 0 ? lo : hi) = mid;
  }
  return lo;
}

// At most two jumps down: column n >= 2 puts weights 1, g1, g2 on n, n-1, n-2.
// With d = 2 only the single-jump column exists and gamma2 plays no role.
inline TransitionMatrix two_jump(std::size_t d, double gamma1, double gamma2) {
  detail::check_dimension(d);
  if (!(gamma1 >= 0) || !(gamma2 >= 0)) {
    throw validation_error("two_jump: gamma1 and gamma2 must be nonnegative");
  }
  RealMatrix q(d);
  q(0, 0) = 1;
  if (d > 1) {
    q(1, 1) = 1 / (1 + gamma1);
    q(0, 1) = gamma1 / (1 + gamma1);
  }
  const double norm = 1 + gamma1 + gamma2;
  for (std::size_t n = 2; n < d; ++n) {
    q(n, n) = 1 / norm;
    q(n - 1, n) = gamma1 / norm;
    q(n - 2, n) = gamma2 / norm;
  }
  return detail::finalize_columns(std::move(q), "two_jump");
}

// Lambda channel: only the top level decays, geometrically towards the bottom.
inline TransitionMatrix lambda_channel(std::size_t d, double gamma) {
  detail::check_dimension(d);
  if (!(gamma >= 0)) throw validation_error("lambda: gamma must be nonnegative");
  RealMatrix q = RealMatrix::identity(d);
  detail::geometric_column(q, d - 1, gamma);
  return detail::finalize_columns(std::move(q), "lambda");
}

// V channel: level n survives with 1 - g_n, otherwise drops straight to 0.
inline TransitionMatrix v_channel(std::size_t d, std::span<const double> gammas) {
  detail::check_dimension(d);
  const auto g = detail::broadcast(d, gammas);
  detail::require_range(g, 0.0, 1.0, "v");
  RealMatrix q(d);
  q(0, 0) = 1;
  for (std::size_t n = 1; n < d; ++n) {
    q(n, n) = 1 - g[n];
    q(0, n) = g[n];
  }
  return detail::finalize_columns(std::move(q), "v");
}

inline TransitionMatrix v_channel(std::size_t d, double gamma) {
  return v_channel(d, std::span<const double>(&gamma, 1));
}

// Checks keys and types of a spec without building the channel.
inline void validate_keys(const ChannelSpec& spec) {
  const auto keys = family_parameter_keys(spec.family);
  for (const auto& [key, value] : spec.params) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw validation_error("unknown parameter \"" + key + "\" for family " +
                             std::string(to_string(spec.family)));
    }
    if (is_integer_parameter(key) && value != std::floor(value)) {
      throw validation_error("parameter \"" + key + "\" must be an integer");
    }
  }
  if (!spec.level_gammas.empty()) {
    if (!accepts_level_gammas(spec.family)) {
      throw validation_error("family " + std::string(to_string(spec.family)) +
                             " does not take per-level gammas");
    }
    if (spec.params.contains("gamma")) {
      throw validation_error("give either \"gamma\" or \"gammas\", not both");
    }
  }
}

// Non-fatal remarks about a spec (currently: two_jump with d = 2).
inline std::vector<std::string> spec_warnings(const ChannelSpec& spec) {
  std::vector<std::string> out;
  if (spec.family == Family::two_jump && spec.dim == 2 && spec.params.contains("gamma2") &&
      spec.params.at("gamma2") != 0) {
    out.emplace_back("two_jump with d = 2 has a single jump; gamma2 is ignored");
  }
  return out;
}

// Direct-basis transition matrix of the channel described by spec.
inline TransitionMatrix build_transition(const ChannelSpec& spec) {
  validate_keys(spec);
  const std::size_t d = spec.dim;
  auto gammas = [&]() -> std::vector<double> {
    if (!spec.level_gammas.empty()) return spec.level_gammas;
    return {detail::param(spec, "gamma")};
  };
  switch (spec.family) {
    case Family::bosonic: return bosonic(d, gammas());
    case Family::hypergeometric:
      return hypergeometric(d, detail::integer_param(spec, "M"), detail::integer_param(spec, "L"));
    case Family::negative_hypergeometric:
      return negative_hypergeometric(d, detail::integer_param(spec, "M"),
                                     detail::integer_param(spec, "L"));
    case Family::beta_binomial:
      return beta_binomial(d, detail::param(spec, "alpha"), detail::param(spec, "beta"));
    case Family::geometric: return geometric(d, gammas());
    case Family::constant_ratio: return constant_ratio(d, gammas());
    case Family::two_jump:
      return two_jump(d, detail::param(spec, "gamma1"), detail::param(spec, "gamma2"));
    case Family::lambda: return lambda_channel(d, detail::param(spec, "gamma"));
    case Family::v: return v_channel(d, gammas());
  }
  throw validation_error("unhandled family");
}

struct Moments {
  double mean = 0;
  double variance = 0;
};

// Closed-form mean and variance of column n for the four distribution-based families.
inline Moments family_moments(const ChannelSpec& spec, std::size_t n) {
  validate_keys(spec);
  if (n >= spec.dim) throw validation_error("level index out of range");
  const double nn = double(n);
  switch (spec.family) {
    case Family::bosonic: {
      const double g = spec.level_gammas.empty()
                           ? detail::param(spec, "gamma")
                           : detail::broadcast(spec.dim, spec.level_gammas)[n];
      return {nn * (1 - g), nn * g * (1 - g)};
    }
    case Family::hypergeometric: {
      const double M = double(detail::integer_param(spec, "M"));
      const double L = double(detail::integer_param(spec, "L"));
      const double r = M / L;
      const double var = L > 1 ? nn * r * (1 - r) * (L - nn) / (L - 1) : 0.0;
      return {nn * r, var};
    }
    case Family::negative_hypergeometric: {
      const double M = double(detail::integer_param(spec, "M"));
      const double L = double(detail::integer_param(spec, "L"));
      const double mu = nn * M / (L - nn + 1);
      const double var = n == 0 ? 0.0 : mu * (1 - mu / nn) * (L + 1) / (L - nn + 2);
      return {mu, var};
    }
    case Family::beta_binomial: {
      const double a = detail::param(spec, "alpha");
      const double b = detail::param(spec, "beta");
      const double xi = a / (a + b);
      return {nn * xi, nn * xi * (1 - xi) * (a + b + nn) / (a + b + 1)};
    }
    default:
      throw validation_error("no closed-form moments for family " +
                             std::string(to_string(spec.family)));
  }
}

// Mean and variance of column n computed from the matrix itself.
inline Moments column_moments(const TransitionMatrix& q, std::size_t n) {
  double mean = 0;
  double second = 0;
  for (std::size_t m = 0; m < q.dim(); ++m) {
    mean += double(m) * q(m, n);
    second += double(m) * double(m) * q(m, n);
  }
  return {mean, second - mean * mean};
}

}  // namespace dampcap
