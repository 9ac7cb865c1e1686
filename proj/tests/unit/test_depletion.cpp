#include <gtest/gtest.h>

#include <cmath>

#include "rayleigh/depletion.hpp"

using namespace rayleigh;

TEST(Depletion, ThetaWeight) {
  EXPECT_EQ(theta_weight(2.0), 1.0);
  EXPECT_EQ(theta_weight(-1.0), 1.0);
  EXPECT_NEAR(theta_weight(std::exp(-3.0)), 4.0, 1e-12);
  EXPECT_TRUE(std::isinf(theta_weight(0.0)));
}

TEST(Depletion, PowerFitRecoversExactLaws) {
  std::vector<double> x, y;
  for (int k = 1; k <= 10; ++k) {
    x.push_back(0.1 * k);
    y.push_back(3.0 * std::pow(0.1 * k, 2.5));
  }
  auto f = fit_power_law(x, y);
  EXPECT_NEAR(f.exponent, 2.5, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  y[3] = 0.0;
  EXPECT_THROW(fit_power_law(x, y), NumericError);
}

TEST(Depletion, DecayQuantityNamesRoundTrip) {
  for (auto q : {DecayQuantity::Psi, DecayQuantity::Dpsi, DecayQuantity::PsiInt, DecayQuantity::OmegaRemainder})
    EXPECT_EQ(parse_decay_quantity(to_string(q)), q);
  EXPECT_THROW(parse_decay_quantity("omega"), ValidationError);
}

TEST(Depletion, LogSpacedEndpoints) {
  auto t = log_spaced(20, 200, 8);
  ASSERT_EQ(t.size(), 8u);
  EXPECT_DOUBLE_EQ(t.front(), 20.0);
  EXPECT_NEAR(t.back(), 200.0, 1e-12);
  for (std::size_t k = 1; k + 1 < t.size(); ++k) EXPECT_NEAR(t[k] * t[k], t[k - 1] * t[k + 1], 1e-9);
}

TEST(Depletion, JetVorticityVanishesQuadraticallyAtTheExtremum) {
  auto p = builtin_profile(ProfileKind::Jet);
  auto d = gaussian_datum(1.0, 0.7, 0.5);
  auto dp = compute_omega_inf(p, d, uniform_grid(0.0, 3.0, 31));
  ASSERT_EQ(dp.layers.size(), 1u);
  const auto& l = dp.layers[0];
  EXPECT_LT(l.abs_at_extr, 1e-3 * l.max_abs);
  EXPECT_NEAR(l.fit_exponent, 2.0, 0.2);
  EXPECT_NEAR(l.zeta_b_exponent, 2.0, 0.2);
  // The two parts add up to the limit.
  for (std::size_t i = 0; i < dp.ygrid.size(); ++i)
    EXPECT_LT(std::abs(dp.zeta_int[i] + dp.zeta_b[i] - dp.omega_inf[i]), 1e-9 * std::max(1.0, std::abs(dp.omega_inf[i])));
}

TEST(Depletion, MonotoneProfileHasNoLayers) {
  auto p = builtin_profile(ProfileKind::Exp);
  auto d = gaussian_datum(1.0, 0.7, 0.5);
  auto dp = compute_omega_inf(p, d, uniform_grid(0.0, 3.0, 7));
  EXPECT_TRUE(dp.layers.empty());
  EXPECT_EQ(layer_weight(p, 1.0), 1.0);
}

TEST(Depletion, SyntheticDecayFit) {
  auto p = builtin_profile(ProfileKind::Exp);
  EvolutionField f;
  f.alpha = 1.0;
  f.ygrid = {0.5, 1.0};
  for (double t : log_spaced(20, 200, 10)) {
    f.times.push_back(t);
    std::vector<cplx> v = {cplx(2.0 / (t * t)), cplx(1.0 / (t * t))};
    f.psi.push_back(v);
    f.decay_psi.push_back(v);
    f.dpsi.push_back(v);
    f.decay_dpsi.push_back(v);
  }
  auto fit = fit_decay(p, f, DecayQuantity::Psi, 20, 200);
  EXPECT_NEAR(fit.exponent, -2.0, 1e-10);
  EXPECT_THROW(fit_decay(p, f, DecayQuantity::Psi, 20, 30), ValidationError);
}
