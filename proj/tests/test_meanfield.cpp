#include <doctest.h>

#include <cmath>
#include <random>

#include "mtlen/errors.hpp"
#include "mtlen/meanfield.hpp"

using namespace mtlen;

namespace {

ModelParams calibrated(double gamma, double T_tot = 1000.0) {
  PrescribedParams pre;
  pre.gamma = gamma;
  return calibrate(ObservedQuantities{}, pre).with_total_tubulin(T_tot);
}

struct SweepOracle {
  double gamma;
  double L[5];  // T_tot = 700, 1000, 1700, 3000, 4000
};

constexpr double kLevels[] = {700.0, 1000.0, 1700.0, 3000.0, 4000.0};
constexpr SweepOracle kSweep[] = {
    {0.0, {24.6393, 35.0, 60.4178, 111.5949, 153.6511}},
    {0.005, {25.8596, 35.0, 49.3058, 58.6904, 61.1081}},
    {0.03, {29.6612, 35.0, 39.0591, 40.6528, 41.0525}},
};

}  // namespace

TEST_CASE("vector field at the domain boundary") {
  const ModelParams p = calibrated(0.005);
  const MeanFieldState at_origin = rhs({0.0, 0.0, 0.0}, p);
  CHECK(at_origin.L == 0.0);
  CHECK(at_origin.g_plus == doctest::Approx(p.lambda_sg_plus));
  CHECK(at_origin.g_minus == doctest::Approx(p.lambda_sg_minus));

  const double L_max = p.prescribed.T_tot / p.prescribed.N;
  for (double g : {0.0, 0.3, 1.0}) {
    const MeanFieldState d = rhs({L_max, g, g}, p);
    // no growth term: only depolymerization remains
    CHECK(d.L <= 0.0);
    CHECK(d.L == doctest::Approx(-(p.v_s_plus + p.v_s_minus) * (1.0 - g) * psi(p.psi_spec(), L_max)));
  }
}

TEST_CASE("calibrated steady state is a fixed point of the vector field") {
  for (double gamma : {0.0, 0.005, 0.03}) {
    CAPTURE(gamma);
    const ModelParams p = calibrated(gamma);
    const SteadyState s = solve_steady_state(p);
    CHECK(s.L_star == doctest::Approx(35.0).epsilon(1e-8));
    CHECK(std::abs(s.L_star - 35.0) < 1e-6);
    CHECK(s.residual < 1e-10);
    const MeanFieldState d = rhs({s.L_star, s.g_plus_star, s.g_minus_star}, p);
    CHECK(std::abs(d.L) < 1e-10);
    CHECK(std::abs(d.g_plus) < 1e-10);
    CHECK(std::abs(d.g_minus) < 1e-10);
  }
}

TEST_CASE("steady growth fractions") {
  const ModelParams flat = calibrated(0.0);
  for (double L : {0.0, 10.0, 35.0, 49.0}) {
    CHECK(g_star(L, flat).first == doctest::Approx(0.35915896732592317 / (0.35915896732592317 + 0.5)));
  }
  for (double gamma : {0.0, 0.005, 0.03}) {
    const ModelParams p = calibrated(gamma);
    const auto [gp, gm] = g_star(35.0, p);
    CHECK(gp == doctest::Approx(p.lambda_sg_plus / (p.lambda_sg_plus + p.lambda_gs_plus)));
    CHECK(gm == doctest::Approx(p.lambda_sg_minus / (p.lambda_sg_minus + p.lambda_gs_minus)));
  }
  for (double gamma : {0.005, 0.03}) {
    const ModelParams p = calibrated(gamma);
    double prev_p = 2.0, prev_m = 2.0;
    int strict = 0;
    for (int i = 0; i <= 1000; ++i) {
      const auto [gp, gm] = g_star(0.05 * i, p);
      CHECK(gp <= prev_p);
      CHECK(gm <= prev_m);
      strict += gp < prev_p;
      prev_p = gp;
      prev_m = gm;
    }
    // strictly decreasing wherever the plus-end floor is inactive
    const double floor_edge = p.prescribed.L0 - (p.lambda_gs_plus - p.prescribed.lambda_min) / gamma;
    CHECK(strict >= static_cast<int>(1000 - std::max(0.0, floor_edge) / 0.05) - 1);
  }
}

TEST_CASE("balance function brackets a root") {
  for (double gamma : {0.0, 0.005, 0.03}) {
    for (double T : kLevels) {
      const ModelParams p = calibrated(gamma, T);
      CHECK(h_balance(0.0, p) > 0.0);
      CHECK(h_balance(T / 20.0, p) < 0.0);
    }
  }
}

TEST_CASE("nondimensional and dimensional solvers agree") {
  for (double gamma : {0.0, 0.005, 0.03}) {
    for (double T : kLevels) {
      const ModelParams p = calibrated(gamma, T);
      const NondimGroups g = nondimensionalize(p);
      const SteadyState dim = solve_steady_state(p);
      const SteadyState nd = solve_steady_state_nondim(g);
      CHECK(nd.L_star * g.L_char == doctest::Approx(dim.L_star).epsilon(1e-10));
      CHECK(nd.g_plus_star == doctest::Approx(dim.g_plus_star).epsilon(1e-10));
      CHECK(nd.g_minus_star == doctest::Approx(dim.g_minus_star).epsilon(1e-10));
      for (double L : {1.0, 17.0, 35.0, T / 25.0}) {
        CHECK(h_balance_nondim(L / g.L_char, g) == doctest::Approx(h_balance(L, p)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("steady state sweep against oracle values") {
  for (const auto& o : kSweep) {
    for (int i = 0; i < 5; ++i) {
      CAPTURE(o.gamma);
      CAPTURE(kLevels[i]);
      CHECK(solve_steady_state(calibrated(o.gamma, kLevels[i])).L_star ==
            doctest::Approx(o.L[i]).epsilon(5e-6));
    }
  }
}

TEST_CASE("regulated steady length barely moves with tubulin") {
  const double gap = solve_steady_state(calibrated(0.03, 4000.0)).L_star -
                     solve_steady_state(calibrated(0.03, 1000.0)).L_star;
  CHECK(gap == doctest::Approx(6.0525).epsilon(1e-4));
  const double flat_gap = solve_steady_state(calibrated(0.0, 4000.0)).L_star - 35.0;
  CHECK(flat_gap > 10.0 * gap);
}

TEST_CASE("literal bound on the regulated length increase" * doctest::may_fail()) {
  const double gap = solve_steady_state(calibrated(0.03, 4000.0)).L_star -
                     solve_steady_state(calibrated(0.03, 1000.0)).L_star;
  CHECK(gap < 3.0);
}

TEST_CASE("H curves") {
  const double grid[] = {0.0, 5.0, 20.0, 35.0, 45.0, 50.0};
  for (double gamma : {0.0, 0.005, 0.03}) {
    const ModelParams p = calibrated(gamma);
    CHECK(H0(0.0, p) == 0.0);
    CHECK(H1(50.0, p) == 0.0);
    CHECK(H_intersection(p) == doctest::Approx(solve_steady_state(p).L_star).epsilon(1e-10));
    const HCurves c = H_curves(grid, p);
    CHECK(c.H0.size() == 6);
    CHECK(c.H1.size() == 6);
  }

  // H1 carries T_tot but not gamma; H0 the reverse. Bitwise.
  for (double L : grid) {
    for (double T : {1000.0, 2500.0, 4000.0}) {
      const double ref = H1(L, calibrated(0.0, T));
      for (double gamma : {0.005, 0.03}) CHECK(H1(L, calibrated(gamma, T)) == ref);
    }
    for (double gamma : {0.0, 0.005, 0.03}) {
      const double ref = H0(L, calibrated(gamma, 1000.0));
      for (double T : {2500.0, 4000.0}) CHECK(H0(L, calibrated(gamma, T)) == ref);
    }
  }
}

TEST_CASE("trajectories converge to the steady state") {
  for (double gamma : {0.0, 0.005, 0.03}) {
    const ModelParams p = calibrated(gamma);
    const auto traj = integrate({0.0, 0.5, 0.5}, p, 500.0);
    CHECK(traj.back().t == doctest::Approx(500.0));
    CHECK(traj.back().state.L == doctest::Approx(35.0).epsilon(0.1 / 35.0));
  }
}

TEST_CASE("random interior initial conditions stay in the domain and share one fixed point") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double gamma : {0.0, 0.005, 0.03}) {
    const ModelParams p = calibrated(gamma, 1700.0);
    const double L_star = solve_steady_state(p).L_star;
    const double L_max = p.prescribed.T_tot / p.prescribed.N;
    for (int i = 0; i < 20; ++i) {
      const MeanFieldState init{L_max * unit(rng), unit(rng), unit(rng)};
      const auto traj = integrate(init, p, 2000.0);
      for (const auto& pt : traj) {
        REQUIRE(pt.state.L >= 0.0);
        REQUIRE(pt.state.L <= L_max);
        REQUIRE(pt.state.g_plus >= 0.0);
        REQUIRE(pt.state.g_plus <= 1.0);
        REQUIRE(pt.state.g_minus >= 0.0);
        REQUIRE(pt.state.g_minus <= 1.0);
      }
      CHECK(std::abs(traj.back().state.L - L_star) < 0.1);
    }
  }
}

TEST_CASE("integrator step failure") {
  IntegratorOptions opts;
  opts.min_step = 1.0;
  opts.initial_step = 0.5;
  opts.rel_tol = 1e-14;
  opts.abs_tol = 1e-16;
  try {
    integrate({0.0, 0.5, 0.5}, calibrated(0.03), 100.0, opts);
    FAIL("expected StepFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepFailure);
  }
}
