#include <gtest/gtest.h>

#include <cmath>

#include "rayleigh/extremal.hpp"
#include "rayleigh/rayleigh_solver.hpp"

using namespace rayleigh;

namespace {

// Residual of the Rayleigh equation by centred differences on a fine uniform grid.
double residual(const ShearProfile& p, double alpha, cplx c, const ModeSolution& m) {
  double worst = 0, scale = 0;
  const double h = m.grid[1] - m.grid[0];
  for (std::size_t i = 1; i + 1 < m.grid.size(); ++i) {
    double y = m.grid[i];
    cplx d2 = (m.dpsi[i + 1] - m.dpsi[i - 1]) / (2 * h);
    cplx r = (p.U(y) - c) * (d2 - alpha * alpha * m.psi[i]) - p.U2(y) * m.psi[i];
    worst = std::max(worst, std::abs(r));
    scale = std::max(scale, std::abs(m.psi[i]));
  }
  return worst / scale;
}

}  // namespace

TEST(Solver, MinusSolvesRayleighAndDecays) {
  auto p = builtin_profile(ProfileKind::Exp);
  const double alpha = 1.2;
  const cplx c(0.4, 0.2);
  auto m = solve_minus(p, {alpha, c}, uniform_grid(0.0, 8.0, 4001));
  EXPECT_LT(residual(p, alpha, c, m), 1e-5);
  // Far field: psi_minus ~ e^{-alpha y}.
  std::size_t a = 3000, b = 4000;
  double rate = -std::log(std::abs(m.psi[b] / m.psi[a])) / (m.grid[b] - m.grid[a]);
  EXPECT_NEAR(rate, alpha, 1e-3);
}

TEST(Solver, WronskianOfTheBasisIsOne) {
  auto p = builtin_profile(ProfileKind::Jet);
  const cplx c(0.2, 0.05);
  auto b = solve_basis(p, {0.8, c}, graded_grid(p, c, 200));
  for (cplx w : wronskian_profile(b)) EXPECT_NEAR(std::abs(w - 1.0), 0.0, 1e-7);
}

TEST(Solver, RealCAtACriticalLayerIsTheUpperLimit) {
  auto p = builtin_profile(ProfileKind::Exp);
  const double alpha = 1.0;
  auto g = std::vector<double>{0.3, 1.0, 2.5};
  auto real = solve_minus(p, {alpha, cplx(0.5, 0.0)}, g);
  auto near = solve_minus(p, {alpha, cplx(0.5, 1e-7)}, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_LT(std::abs(real.psi[i] - near.psi[i]) / std::abs(near.psi[i]), 1e-5) << "y=" << g[i];
}

TEST(Solver, DispersionIsContinuousFromAbove) {
  auto p = builtin_profile(ProfileKind::Exp);
  cplx d0 = dispersion_value(p, 1.0, cplx(0.3, 0.0));
  cplx d1 = dispersion_value(p, 1.0, cplx(0.3, 1e-6));
  EXPECT_LT(std::abs(d0 - d1), 1e-4 * std::abs(d0));
}

TEST(Solver, ExtremalVelocityIsRejected) {
  auto p = builtin_profile(ProfileKind::Jet);
  double ce = p.extremal_layers()[0].c_extr;
  EXPECT_THROW(solve_minus(p, {1.0, cplx(ce, 0.0)}, std::vector<double>{0.5}), ExtremalVelocityError);
  EXPECT_NO_THROW(solve_minus(p, {1.0, cplx(ce, 1e-3)}, std::vector<double>{0.5}));
}

TEST(Solver, PartnerByQuadratureMatchesIntegratedPartner) {
  auto p = builtin_profile(ProfileKind::Exp);
  const cplx c(0.5, 0.3);
  auto g = uniform_grid(0.0, 6.0, 1201);
  auto b = solve_basis(p, {1.0, c}, g);
  auto q = partner_by_quadrature(b.psi_minus, b.anchor);
  double e = 0, m = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    e = std::max(e, std::abs(q[i] - b.psi_plus.psi[i]));
    m = std::max(m, std::abs(b.psi_plus.psi[i]));
  }
  EXPECT_LT(e / m, 1e-6);
}

TEST(Solver, ParabolaClosedFormSatisfiesTheEquation) {
  // alpha = 0, U = y^2: (y^2 - c) psi'' = 2 psi.
  const cplx c(0.3, 0.1);
  const double h = 1e-4;
  for (double y : {0.2, 0.6, 1.1}) {
    cplx f0 = explicit_psi2_parabola(y, c);
    cplx d2 = (explicit_psi2_parabola(y + h, c) - 2.0 * f0 + explicit_psi2_parabola(y - h, c)) / (h * h);
    EXPECT_LT(std::abs((y * y - c) * d2 - 2.0 * f0), 1e-5 * std::abs(f0));
  }
}

TEST(Solver, LocalIterationPairHasUnitWronskian) {
  // Exact for the continuous problem; the discrete pair approaches 1 as the
  // Chebyshev order resolves the sqrt(Im c) layer, down to rounding in
  // products of size |Im c|^{-3/2}.
  auto p = builtin_profile(ProfileKind::Jet);
  const double ce = p.extremal_layers()[0].c_extr;
  auto worst = [&](int order, LocalIterationReport* rep) {
    auto b = local_iteration_solution(p, {1.0, cplx(ce, 1e-3)}, 1.0, 0.3, rep, order);
    double e = 0;
    for (cplx w : wronskian_profile(b)) e = std::max(e, std::abs(w - 1.0));
    return e;
  };
  LocalIterationReport rep;
  double coarse = worst(64, nullptr), fine = worst(256, &rep);
  EXPECT_LT(fine, 1e-7);
  EXPECT_LT(fine, 1e-2 * coarse);
  EXPECT_GT(rep.iterations, 0);
  EXPECT_LT(rep.max_ratio, 0.5);
}

TEST(Solver, RejectsNegativeImaginaryPart) {
  auto p = builtin_profile(ProfileKind::Exp);
  EXPECT_THROW(solve_minus(p, {1.0, cplx(0.5, -0.1)}, std::vector<double>{1.0}), ValidationError);
}

TEST(Solver, JPrimitivesDifferentiateToTheirIntegrands) {
  auto p = builtin_profile(ProfileKind::Jet);
  const double ce = p.extremal_layers()[0].c_extr;
  const double scale = 0.5 * p.extremal_layers()[0].us2_at_extr;
  auto f = extremal_frame(p, 0, ce + scale * cplx(0.05, 0.01));
  const cplx z1 = f.z1, z2 = f.z2;
  const cplx v(0.37, 0.21);
  const double h = 1e-5;
  auto J = [&](cplx x) { return eval_J_primitives(f, x); };
  auto jp = J(v + h), jm = J(v - h);
  cplx q = 1.0 / ((v - z1) * (v - z2));
  EXPECT_LT(std::abs((jp[0] - jm[0]) / (2 * h) - q * q), 1e-6 * std::abs(q * q));
  EXPECT_LT(std::abs((jp[1] - jm[1]) / (2 * h) - v * q * q), 1e-6 * std::abs(v * q * q));
  EXPECT_LT(std::abs((jp[2] - jm[2]) / (2 * h) - q), 1e-6 * std::abs(q));
  EXPECT_LT(std::abs((jp[3] - jm[3]) / (2 * h) - v * q), 1e-6 * std::abs(v * q));
  EXPECT_THROW(J(z1), PoleError);
}
