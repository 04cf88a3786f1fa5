#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rirkit/error.hpp"
#include "rirkit/nyquist.hpp"

using namespace rirkit;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force oracle: uniform sampling, sign changes of Im with Re > 1.
std::pair<int, int> dense_counts(const RationalTF& L, double eps, int n) {
  int plus = 0, minus = 0;
  auto P = [&](double w) { return L(std::polar(1.0 / (1.0 - eps), -w)); };
  // Half-offset closed grid: w = +-pi is a real point of the plot.
  cplx prev = P(-kPi + kPi / n);
  for (int k = 1; k <= n; ++k) {
    const cplx cur = P(-kPi + kPi / n + 2 * kPi * k / n);
    if ((prev.imag() < 0) != (cur.imag() < 0) && 0.5 * (prev.real() + cur.real()) > 1.0) {
      (prev.imag() < 0 ? plus : minus) += 1;
    }
    prev = cur;
  }
  return {plus, minus};
}

}  // namespace

TEST(Nyquist, ConstantLoop) {
  auto r = crossing_counts(RationalTF::constant(0.5), {});
  EXPECT_EQ(r.nu_plus, 0);
  EXPECT_EQ(r.nu_minus, 0);
  EXPECT_EQ(r.encirclements_cw, 0);
}

TEST(Nyquist, MatchesDenseOracle) {
  RationalTF L({2.0}, {1.0, -0.5});
  ContourSpec s;
  s.epsilon = 0.01;
  auto r = crossing_counts(L, s);
  auto [p, m] = dense_counts(L, 0.01, 1000000);
  EXPECT_EQ(r.nu_plus, p);
  EXPECT_EQ(r.nu_minus, m);
  EXPECT_EQ(r.nu_o, r.nu_plus - r.nu_minus);
  EXPECT_EQ(r.encirclements_cw, -r.nu_o);
  EXPECT_EQ(r.winding_cw, r.encirclements_cw);
}

TEST(Nyquist, RandomDualityAndOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const cplx p = std::polar(1.2 + 0.5 * std::abs(u(rng)), std::abs(u(rng)) * kPi);
    RationalTF L = RationalTF::from_zpk({u(rng)}, {p, std::conj(p)}, 3.0 * u(rng));
    ContourSpec s;
    s.epsilon = 1e-3;
    auto r = crossing_counts(L, s);
    auto [pl, mi] = dense_counts(L, 1e-3, 200000);
    EXPECT_EQ(r.nu_o, pl - mi) << t;
    EXPECT_EQ(r.winding_cw, -r.nu_o) << t;
  }
}

TEST(Nyquist, ClosedLoopPoles) {
  auto rs = closed_loop_poles(RationalTF({0.5}, {1.0, -2.0}));
  ASSERT_EQ(rs.count(), 1);
  EXPECT_NEAR(rs.roots[0].value.real(), 2.5, 1e-14);
}

TEST(Nyquist, Lemma1) {
  auto bad = lemma1_check(RationalTF({2.0}, {1.0, -2.0}), 1);
  EXPECT_FALSE(bad.holds);
  EXPECT_FALSE(bad.nyquist_holds);
  auto good = lemma1_check(RationalTF({-2.0}, {1.0, -2.0}), 1);
  EXPECT_TRUE(good.holds);
  EXPECT_TRUE(good.nyquist_holds);
}

TEST(Nyquist, SmallGainRandomStable) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int t = 0; t < 50; ++t) {
    RationalTF L0 = RationalTF::from_zpk({u(rng)}, {u(rng), u(rng)}, 1.0);
    RationalTF L = (0.99 / linf_norm(L0).norm) * L0;
    for (const auto& r : closed_loop_poles(L).roots) EXPECT_LT(std::abs(r.value), 1.0);
  }
}

TEST(Nyquist, RepeatedBoundaryRootNotMarginal) {
  Polynomial den = Polynomial::from_roots(std::vector<cplx>{2.0, -0.3, 0.1}, 1.0);
  Polynomial rep = Polynomial::from_roots(std::vector<cplx>{1.0, 1.0, 0.5}, 1.0);
  RationalTF L(den - rep, den);
  auto v = marginal_verdict(L, 0.0);
  EXPECT_FALSE(v.marginal);
  EXPECT_FALSE(v.single_mode);
  EXPECT_FALSE(v.cond_i);
  EXPECT_TRUE(v.roots_agree);
}

TEST(Nyquist, SingleModeAtPlusOne) {
  auto v = marginal_verdict(RationalTF({-1.0}, {1.0, -2.0}), 0.0);
  EXPECT_TRUE(v.single_mode);
  EXPECT_EQ(v.mode, Mode::pole_at_plus_one);
  EXPECT_TRUE(v.cond_i);
  EXPECT_TRUE(v.cond_iia);
  EXPECT_EQ(v.nu_o0, 0);
  EXPECT_TRUE(v.certificate);

  auto s = marginal_verdict(RationalTF({0.5}, {1.0, -0.5}), 0.0);
  EXPECT_TRUE(s.single_mode);
  EXPECT_TRUE(s.cond_iib);
  EXPECT_TRUE(s.roots_agree);
}

TEST(Nyquist, RateDPrecondition) {
  RationalTF L({1.0}, {1.0, -2.0});
  EXPECT_THROW(marginal_verdict(L, 1.0), PreconditionError);
}
