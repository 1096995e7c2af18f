#include "dampcap/capacity.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "support/random_channels.hpp"

using namespace dampcap;
using dampcap::testing::binary_entropy;
using dampcap::testing::random_amplitudes;
using dampcap::testing::z_channel_capacity;

namespace {

TransitionMatrix binary_symmetric(double f) {
  RealMatrix q(2);
  q(0, 0) = q(1, 1) = 1 - f;
  q(0, 1) = q(1, 0) = f;
  return TransitionMatrix(q);
}

TransitionMatrix z_channel(double p) {
  RealMatrix q(2);
  q(0, 0) = 1;
  q(0, 1) = p;
  q(1, 1) = 1 - p;
  return TransitionMatrix(q);
}

TransitionMatrix random_circulant(std::size_t d, std::mt19937_64& rng) {
  std::exponential_distribution<double> e;
  std::vector<double> col(d);
  double s = 0;
  for (double& x : col) s += (x = e(rng));
  RealMatrix q(d);
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m < d; ++m) q(m, n) = col[(m + d - n) % d] / s;
  return TransitionMatrix(q);
}

ChannelSpec make(Family f, std::size_t d, std::map<std::string, double> params) {
  ChannelSpec s;
  s.family = f;
  s.dim = d;
  s.params = std::move(params);
  return s;
}

}  // namespace

TEST(capacity, mutual_information) {
  EXPECT_NEAR(mutual_information(TransitionMatrix::identity(4), ProbVector::uniform(4)), 2, 1e-14);
  EXPECT_EQ(mutual_information(binary_symmetric(0.2), ProbVector::deterministic(2, 1)), 0);
  EXPECT_NEAR(mutual_information(binary_symmetric(0.11), ProbVector::uniform(2)),
              1 - binary_entropy(0.11), 1e-14);
  EXPECT_NEAR(mutual_information(binary_symmetric(0.11), ProbVector::uniform(2)), 0.50012, 1e-4);
  EXPECT_THROW(mutual_information(binary_symmetric(0.1), ProbVector::uniform(3)), dimension_error);
}

TEST(capacity, blahut_arimoto_closed_forms) {
  const auto id = blahut_arimoto(TransitionMatrix::identity(8));
  EXPECT_TRUE(id.certified);
  EXPECT_NEAR(id.information, 3, 1e-9);
  for (std::size_t n = 0; n < 8; ++n) EXPECT_NEAR(id.prior[n], 0.125, 1e-12);

  for (double f : {0.05, 0.11, 0.25}) {
    const auto r = blahut_arimoto(binary_symmetric(f));
    EXPECT_NEAR(r.information, 1 - binary_entropy(f), 1e-6);
    EXPECT_NEAR(r.prior[0], 0.5, 1e-9);
  }
  for (double p : {0.25, 0.5, 0.75}) {
    const auto r = blahut_arimoto(z_channel(p), 1e-9);
    EXPECT_TRUE(r.certified);
    EXPECT_LE(r.gap, 1e-9);
    EXPECT_NEAR(r.information, z_channel_capacity(p), 1e-6) << "p=" << p;
  }
  const auto z = blahut_arimoto(z_channel(0.5));
  EXPECT_NEAR(z.information, std::log2(1.25), 1e-6);
  EXPECT_GT(std::abs(z.prior[0] - 0.5), 0.05);  // optimal prior is not uniform
}

TEST(capacity, blahut_arimoto_uncertified_when_budget_runs_out) {
  const auto r = blahut_arimoto(z_channel(0.5), 1e-12, 3);
  EXPECT_FALSE(r.certified);
  EXPECT_EQ(r.iterations, 3u);
  EXPECT_GT(r.gap, 1e-12);
  EXPECT_THROW(blahut_arimoto(z_channel(0.5), 0.0), validation_error);
}

TEST(capacity, blahut_arimoto_is_monotone) {
  std::mt19937_64 rng(77);
  for (std::size_t d = 2; d <= 8; ++d) {
    for (int i = 0; i < 10; ++i) {
      const auto q = direct_transition(random_amplitudes(d, rng));
      double last = -1;
      blahut_arimoto(q, 1e-10, 100000, [&](std::size_t, double info) {
        EXPECT_GE(info, last - 1e-12);
        last = info;
      });
    }
  }
}

TEST(capacity, blahut_arimoto_respects_bounds) {
  std::mt19937_64 rng(78);
  for (std::size_t d = 2; d <= 8; ++d) {
    const auto q = direct_transition(random_amplitudes(d, rng));
    const auto r = blahut_arimoto(q);
    EXPECT_GE(r.information, 0);
    EXPECT_LE(r.information, std::log2(double(d)) + 1e-12);
    EXPECT_NEAR(r.information, mutual_information(q, r.prior), 1e-12);
  }
}

TEST(capacity, symmetric_capacity) {
  EXPECT_NEAR(symmetric_capacity(TransitionMatrix::identity(5)), std::log2(5.0), 1e-14);
  RealMatrix flat(4, 0.25);
  EXPECT_NEAR(symmetric_capacity(TransitionMatrix(flat)), 0, 1e-14);
  RealMatrix half(2, 0.5);
  EXPECT_NEAR(symmetric_capacity(TransitionMatrix(half)), 0, 1e-14);
  EXPECT_THROW(symmetric_capacity(z_channel(0.3)), validation_error);
}

TEST(capacity, symmetric_capacity_agrees_with_blahut_arimoto) {
  std::mt19937_64 rng(5);
  const double tol = 1e-9;
  for (std::size_t d = 2; d <= 10; ++d) {
    for (int i = 0; i < 5; ++i) {
      const auto q = random_circulant(d, rng);
      EXPECT_NEAR(symmetric_capacity(q), blahut_arimoto(q, tol).information, 2 * tol);
    }
  }
}

TEST(capacity, holevo_direct) {
  EXPECT_NEAR(holevo_direct(TransitionMatrix::identity(6), ProbVector::uniform(6)),
              std::log2(6.0), 1e-14);
  const auto full = bosonic(4, 1.0);
  EXPECT_NEAR(holevo_direct(full, ProbVector({0.1, 0.2, 0.3, 0.4})), 0, 1e-14);

  std::mt19937_64 rng(19);
  for (std::size_t d = 2; d <= 8; ++d) {
    const auto q = direct_transition(random_amplitudes(d, rng));
    const auto ba = blahut_arimoto(q);
    EXPECT_NEAR(holevo_direct(q, ba.prior), ba.information, 1e-9);
  }
}

TEST(capacity, holevo_fourier) {
  EXPECT_NEAR(holevo_fourier(AmplitudeMatrix::identity(8)), 3, 1e-10);
  EXPECT_NEAR(holevo_fourier(amplitudes_from_transition(bosonic(5, 1.0))), 0, 1e-10);

  std::mt19937_64 rng(21);
  for (std::size_t d = 2; d <= 8; ++d) {
    for (int i = 0; i < 10; ++i) {
      const auto c = random_amplitudes(d, rng);
      const double chi = holevo_fourier(c);
      EXPECT_GE(chi, symmetric_capacity(fourier_transition(c)) - 1e-9);
      // Same value from the full average over all d Fourier outputs.
      double avg = 0;
      for (std::size_t n = 0; n < d; ++n) avg += von_neumann_entropy(fourier_output_state(c, n));
      EXPECT_NEAR(chi, shannon_entropy(level_populations(c)) - avg / double(d), 1e-9);
    }
  }
}

TEST(capacity, winner_tie_break) {
  EXPECT_EQ(pick_winner(1.0, 1.0), Basis::fourier);
  EXPECT_EQ(pick_winner(1.0 + 1e-13, 1.0), Basis::fourier);
  EXPECT_EQ(pick_winner(1.0 + 1e-9, 1.0), Basis::direct);
  EXPECT_EQ(pick_winner(0.5, 1.0), Basis::fourier);
}

TEST(capacity, detected_capacity_noiseless) {
  const auto r = detected_capacity(make(Family::bosonic, 8, {{"gamma", 0.0}}));
  EXPECT_NEAR(r.c_det, 3, 1e-9);
  EXPECT_NEAR(r.i_direct, 3, 1e-9);
  EXPECT_NEAR(r.i_fourier, 3, 1e-9);
  EXPECT_EQ(r.winner, Basis::fourier);
  EXPECT_NEAR(r.delta, 0, 1e-9);
}

// Frozen from tests/oracles/reference.py (explicit Kraus simulation, numpy eigvalsh,
// Blahut-Arimoto run to a 1e-11 bracket).
TEST(capacity, detected_capacity_hypergeometric_point) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = detected_capacity(make(Family::hypergeometric, 8, {{"M", 5}, {"L", 12}}));
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(elapsed, std::chrono::seconds(1));

  EXPECT_EQ(r.winner, Basis::direct);
  EXPECT_NEAR(r.i_direct, 1.0742460594861982, 1e-8);
  EXPECT_NEAR(r.i_fourier, 1.073913721657309, 1e-10);
  EXPECT_NEAR(r.chi_fourier, 1.5585121554793082, 1e-10);
  EXPECT_NEAR(r.delta, 0.16142203199770333, 1e-8);
  EXPECT_EQ(r.prior_support(), (std::vector<std::size_t>{0, 2, 3, 7}));
  EXPECT_NEAR(r.prior_direct[0], 0.4314783033233166, 1e-5);
  EXPECT_NEAR(r.prior_direct[7], 0.3984013684954297, 1e-5);
  EXPECT_NEAR(r.prior_entropy, shannon_entropy(r.prior_direct), 1e-15);
  EXPECT_TRUE(r.ba_certified);
}

TEST(capacity, detected_capacity_v_qubit_prefers_fourier) {
  for (double g : {0.01, 0.2, 0.5, 0.8, 0.99}) {
    EXPECT_EQ(detected_capacity(make(Family::v, 2, {{"gamma", g}})).winner, Basis::fourier);
  }
}

TEST(capacity, detected_capacity_propagates_validation) {
  EXPECT_THROW(detected_capacity(make(Family::hypergeometric, 8, {{"M", 5}, {"L", 4}})),
               validation_error);
}

TEST(capacity, report_invariants_on_random_families) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const std::size_t d = 2 + i % 7;
    for (const auto& s : {make(Family::bosonic, d, {{"gamma", u(rng)}}),
                          make(Family::geometric, d, {{"gamma", 2 * u(rng)}}),
                          make(Family::two_jump, d, {{"gamma1", 2 * u(rng)}, {"gamma2", 2 * u(rng)}})}) {
      const auto r = detected_capacity(s);
      EXPECT_DOUBLE_EQ(r.c_det, std::max(r.i_direct, r.i_fourier));
      EXPECT_NEAR(r.i_direct, r.chi_direct, 1e-9);
      EXPECT_LE(r.i_fourier, r.chi_fourier + 1e-9);
      EXPECT_GE(r.prior_entropy, 0);
      EXPECT_LE(r.prior_entropy, std::log2(double(d)) + 1e-12);
      EXPECT_EQ(r.winner, pick_winner(r.i_direct, r.i_fourier));
    }
  }
}
