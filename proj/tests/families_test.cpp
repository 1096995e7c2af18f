#include "dampcap/families.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/random_channels.hpp"

using namespace dampcap;
using dampcap::testing::max_abs_diff;

namespace {

ChannelSpec make(Family f, std::size_t d, std::map<std::string, double> params) {
  ChannelSpec s;
  s.family = f;
  s.dim = d;
  s.params = std::move(params);
  return s;
}

void expect_column(const TransitionMatrix& q, std::size_t n, std::vector<double> expected,
                   double tol = 1e-14) {
  ASSERT_EQ(expected.size(), q.dim());
  for (std::size_t m = 0; m < q.dim(); ++m) EXPECT_NEAR(q(m, n), expected[m], tol) << "m=" << m;
}

bool is_damping(const TransitionMatrix& q) {
  for (std::size_t n = 0; n < q.dim(); ++n)
    for (std::size_t m = n + 1; m < q.dim(); ++m)
      if (q(m, n) != 0) return false;
  return true;
}

}  // namespace

TEST(families, names_round_trip) {
  for (Family f : all_families) EXPECT_EQ(family_from_string(to_string(f)), f);
  EXPECT_THROW(family_from_string("bogus"), validation_error);
}

TEST(families, bosonic) {
  EXPECT_EQ(bosonic(6, 0.0), TransitionMatrix::identity(6));
  expect_column(bosonic(3, 0.5), 2, {0.25, 0.5, 0.25});
  const auto full = bosonic(4, 1.0);
  for (std::size_t n = 0; n < 4; ++n) expect_column(full, n, {1, 0, 0, 0});
  EXPECT_THROW(bosonic(3, 1.2), validation_error);
  EXPECT_THROW(bosonic(3, -0.1), validation_error);

  const std::vector<double> levels{0.0, 0.2, 0.9};
  const auto q = bosonic(3, levels);
  expect_column(q, 1, {0.2, 0.8, 0});
  expect_column(q, 2, {0.81, 0.18, 0.01});
  EXPECT_THROW(bosonic(3, std::vector<double>{0.1, 0.2}), validation_error);
}

TEST(families, hypergeometric) {
  EXPECT_EQ(hypergeometric(8, 12, 12), TransitionMatrix::identity(8));
  EXPECT_NEAR(hypergeometric(3, 2, 4)(1, 2), 4.0 / 6.0, 1e-14);
  const auto zero = hypergeometric(5, 0, 9);
  for (std::size_t n = 0; n < 5; ++n) EXPECT_NEAR(zero(0, n), 1, 1e-14);
  EXPECT_THROW(hypergeometric(8, 3, 6), validation_error);  // d - 1 > L
  EXPECT_THROW(hypergeometric(4, 7, 6), validation_error);
  EXPECT_THROW(hypergeometric(4, -1, 6), validation_error);

  // Support is max(0, n + M - L) .. min(n, M).
  const long long M = 5, L = 9;
  const auto q = hypergeometric(8, M, L);
  for (long long n = 0; n < 8; ++n)
    for (long long m = 0; m <= n; ++m) {
      const bool in = m >= std::max(0LL, n + M - L) && m <= std::min(n, M);
      EXPECT_EQ(q(std::size_t(m), std::size_t(n)) > 0, in) << m << "|" << n;
    }
}

TEST(families, negative_hypergeometric) {
  const auto q = negative_hypergeometric(2, 1, 2);
  EXPECT_NEAR(q(0, 1), 0.5, 1e-14);
  EXPECT_NEAR(q(1, 1), 0.5, 1e-14);
  EXPECT_NO_THROW(negative_hypergeometric(8, 32 - 7, 32));
  EXPECT_THROW(negative_hypergeometric(8, 32 - 6, 32), validation_error);
  EXPECT_THROW(negative_hypergeometric(3, 0, 10), validation_error);
}

TEST(families, beta_binomial) {
  const auto uniform = beta_binomial(5, 1, 1);
  for (std::size_t n = 0; n < 5; ++n)
    for (std::size_t m = 0; m <= n; ++m) EXPECT_NEAR(uniform(m, n), 1.0 / double(n + 1), 1e-13);
  EXPECT_NEAR(beta_binomial(2, 2, 2)(0, 1), 0.5, 1e-14);
  EXPECT_THROW(beta_binomial(3, 0, 1), validation_error);
  EXPECT_THROW(beta_binomial(3, 1, -1), validation_error);
}

TEST(families, geometric) {
  EXPECT_EQ(geometric(5, 0.0), TransitionMatrix::identity(5));
  const auto flat = geometric(5, 1.0);
  for (std::size_t n = 0; n < 5; ++n)
    for (std::size_t m = 0; m <= n; ++m) EXPECT_NEAR(flat(m, n), 1.0 / double(n + 1), 1e-15);
  expect_column(geometric(3, 0.5), 2, {1.0 / 7, 2.0 / 7, 4.0 / 7});
  // Closed form (1-g)/(1-g^{n+1}) g^{n-m} near, but not at, g = 1.
  const double g = 1 + 1e-6;
  const auto near = geometric(4, g);
  for (std::size_t m = 0; m <= 3; ++m) {
    EXPECT_NEAR(near(m, 3), (1 - g) / (1 - std::pow(g, 4)) * std::pow(g, 3 - double(m)), 1e-9);
  }
  EXPECT_THROW(geometric(3, -0.5), validation_error);
}

TEST(families, constant_ratio) {
  EXPECT_EQ(constant_ratio(5, 0.0), TransitionMatrix::identity(5));
  const auto q = constant_ratio(2, 0.3);
  EXPECT_NEAR(q(0, 1), 0.3, 1e-15);
  EXPECT_NEAR(q(1, 1), 0.7, 1e-15);

  const auto ok = constant_ratio(5, 0.5);
  expect_column(ok, 4, {0.0625, 0.125, 0.25, 0.5, 0.0625});
  EXPECT_THROW(constant_ratio(5, 0.55), validation_error);
  try {
    constant_ratio(5, 0.6);
    ADD_FAILURE() << "gamma = 0.6 accepted in d = 5";
  } catch (const validation_error& e) {
    EXPECT_NE(std::string(e.what()).find("level 3"), std::string::npos) << e.what();
  }
  // Closed-form diagonal (1 - 2g + g^{n+1}) / (1 - g).
  for (double g : {0.1, 0.3, 0.5})
    for (std::size_t n = 0; n < 5; ++n)
      EXPECT_NEAR(constant_ratio_diagonal(n, g), (1 - 2 * g + std::pow(g, double(n + 1))) / (1 - g),
                  1e-14);
  // The boundary found by bisection is admissible, slightly above it is not.
  for (std::size_t d = 2; d <= 6; ++d) {
    const double gmax = constant_ratio_max_gamma(d);
    EXPECT_NO_THROW(constant_ratio(d, gmax));
    if (d > 2) {
      EXPECT_THROW(constant_ratio(d, gmax + 1e-9), validation_error);
    }
  }
  EXPECT_NEAR(constant_ratio_max_gamma(3), (std::sqrt(5.0) - 1) / 2, 1e-12);
}

TEST(families, two_jump) {
  EXPECT_EQ(two_jump(6, 0, 0), TransitionMatrix::identity(6));
  expect_column(two_jump(4, 1, 1), 3, {0, 1.0 / 3, 1.0 / 3, 1.0 / 3});
  expect_column(two_jump(4, 1, 1), 1, {0.5, 0.5, 0, 0});
  const auto q = two_jump(8, 0.7, 1.9);
  for (std::size_t n = 0; n < 8; ++n)
    for (std::size_t m = 0; m + 2 < n; ++m) EXPECT_EQ(q(m, n), 0);
  EXPECT_THROW(two_jump(4, -1, 0), validation_error);

  const auto small = two_jump(2, 0.5, 3.0);
  expect_column(small, 1, {1.0 / 3, 2.0 / 3});
  ChannelSpec s = make(Family::two_jump, 2, {{"gamma1", 0.5}, {"gamma2", 3.0}});
  EXPECT_EQ(spec_warnings(s).size(), 1u);
  s.dim = 3;
  EXPECT_TRUE(spec_warnings(s).empty());
}

TEST(families, lambda_channel) {
  EXPECT_EQ(lambda_channel(4, 0.0), TransitionMatrix::identity(4));
  const auto flat = lambda_channel(4, 1.0);
  expect_column(flat, 3, {0.25, 0.25, 0.25, 0.25});
  const auto q = lambda_channel(5, 0.7);
  for (std::size_t n = 0; n + 1 < 5; ++n)
    for (std::size_t m = 0; m < 5; ++m) EXPECT_EQ(q(m, n), m == n ? 1.0 : 0.0);
  for (std::size_t m = 0; m < 5; ++m) {
    EXPECT_NEAR(q(m, 4), (1 - 0.7) / (1 - std::pow(0.7, 5)) * std::pow(0.7, 4 - double(m)), 1e-14);
  }
  EXPECT_THROW(lambda_channel(4, -0.1), validation_error);
}

TEST(families, v_channel) {
  EXPECT_EQ(v_channel(4, 0.0), TransitionMatrix::identity(4));
  const auto full = v_channel(4, 1.0);
  for (std::size_t n = 0; n < 4; ++n) expect_column(full, n, {1, 0, 0, 0});
  expect_column(v_channel(3, 0.4), 2, {0.4, 0, 0.6});
  EXPECT_THROW(v_channel(3, 1.5), validation_error);
}

TEST(families, build_transition_dispatch_and_validation) {
  EXPECT_EQ(build_transition(make(Family::hypergeometric, 8, {{"M", 5}, {"L", 12}})),
            hypergeometric(8, 5, 12));
  EXPECT_THROW(build_transition(make(Family::hypergeometric, 8, {{"M", 5.5}, {"L", 12}})),
               validation_error);
  EXPECT_THROW(build_transition(make(Family::bosonic, 4, {{"gamma", 0.1}, {"alpha", 1}})),
               validation_error);
  EXPECT_THROW(build_transition(make(Family::bosonic, 4, {})), validation_error);

  ChannelSpec per_level = make(Family::geometric, 3, {});
  per_level.level_gammas = {0.0, 0.5, 0.5};
  EXPECT_EQ(build_transition(per_level), geometric(3, 0.5));
  per_level.family = Family::lambda;
  EXPECT_THROW(build_transition(per_level), validation_error);
}

TEST(families, moments_examples) {
  auto m = family_moments(make(Family::bosonic, 8, {{"gamma", 0.5}}), 4);
  EXPECT_DOUBLE_EQ(m.mean, 2);
  EXPECT_DOUBLE_EQ(m.variance, 1);
  m = family_moments(make(Family::hypergeometric, 8, {{"M", 5}, {"L", 12}}), 7);
  EXPECT_DOUBLE_EQ(m.mean, 35.0 / 12);
  m = family_moments(make(Family::beta_binomial, 8, {{"alpha", 1}, {"beta", 1}}), 2);
  EXPECT_DOUBLE_EQ(m.mean, 1);
  EXPECT_THROW(family_moments(make(Family::geometric, 8, {{"gamma", 0.5}}), 2), validation_error);
}

// Closed-form moments against the moments of the constructed columns.
TEST(families, moments_match_columns_property) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> shape(0.05, 8.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 2 + trial % 12;
    const auto L = static_cast<double>(d - 1 + trial % 20 + 1);
    std::vector<ChannelSpec> specs = {
        make(Family::bosonic, d, {{"gamma", u(rng)}}),
        make(Family::hypergeometric, d, {{"M", std::floor(u(rng) * (L + 1))}, {"L", L}}),
        make(Family::negative_hypergeometric, d,
             {{"M", 1 + std::floor(u(rng) * (L - double(d) + 1))}, {"L", L}}),
        make(Family::beta_binomial, d, {{"alpha", shape(rng)}, {"beta", shape(rng)}}),
    };
    for (const auto& s : specs) {
      if (s.family == Family::hypergeometric && s.params.at("M") > L) continue;
      const auto q = build_transition(s);
      for (std::size_t n = 0; n < d; ++n) {
        const auto closed = family_moments(s, n);
        const auto emp = column_moments(q, n);
        EXPECT_NEAR(closed.mean, emp.mean, 1e-9) << to_string(s.family) << " n=" << n;
        EXPECT_NEAR(closed.variance, emp.variance, 1e-9) << to_string(s.family) << " n=" << n;
      }
    }
  }
}

TEST(families, random_grids_give_damping_transition_matrices) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + trial % 15;
    const std::vector<TransitionMatrix> qs = {
        bosonic(d, u(rng)),
        geometric(d, 3 * u(rng)),
        constant_ratio(d, u(rng) * constant_ratio_max_gamma(d)),
        two_jump(d, 3 * u(rng), 3 * u(rng)),
        lambda_channel(d, 3 * u(rng)),
        v_channel(d, u(rng)),
        beta_binomial(d, 0.01 + 5 * u(rng), 0.01 + 5 * u(rng)),
        hypergeometric(d, static_cast<long long>(u(rng) * double(d + 3)), static_cast<long long>(d + 3)),
    };
    for (const auto& q : qs) EXPECT_TRUE(is_damping(q));
  }
}

TEST(families, limits_approach_bosonic) {
  const double gamma = 0.3;
  const auto reference = bosonic(8, gamma);
  EXPECT_LT(max_abs_diff(hypergeometric(8, 7000, 10000).matrix(), reference.matrix()), 1e-2);
  EXPECT_LT(max_abs_diff(negative_hypergeometric(8, 7000, 10000).matrix(), reference.matrix()), 1e-2);
  EXPECT_LT(max_abs_diff(beta_binomial(8, 0.7e6, 0.3e6).matrix(), reference.matrix()), 1e-2);
}
