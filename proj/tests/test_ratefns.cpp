#include <doctest.h>

#include <cmath>
#include <random>

#include "mtlen/errors.hpp"
#include "mtlen/ratefns.hpp"

using namespace mtlen;

TEST_CASE("phi anchors and linear form") {
  CHECK(phi(0.0) == -1.0);
  CHECK(phi(1.0) == 0.0);
  CHECK(phi(2.0) == 1.0);
  CHECK(is_admissible_shape(phi));
}

TEST_CASE("shape admissibility rejects broken anchors") {
  CHECK_FALSE(is_admissible_shape([](double x) { return x; }));
  CHECK_FALSE(is_admissible_shape([](double x) { return 2.0 * (x - 1.0); }));
  // right anchors and slope, but decreasing past x = 2
  CHECK_FALSE(is_admissible_shape([](double x) { return x < 2.0 ? x - 1.0 : 3.0 - x; }));
  CHECK(is_admissible_shape([](double x) { return x - 1.0 + 0.5 * x * (x - 1.0) * (x - 1.0); }));
}

TEST_CASE("catastrophe rate examples") {
  CatastropheSpec s;
  s.gamma = 0.005;
  CHECK(catastrophe_rate(s, End::Plus, 35.0) == doctest::Approx(0.5).epsilon(1e-15));
  s.gamma = 0.0;
  for (double L : {0.0, 1.0, 35.0, 100.0, 1e4}) CHECK(catastrophe_rate(s, End::Plus, L) == 0.5);
  s.gamma = 0.03;
  CHECK(catastrophe_rate(s, End::Plus, 0.0) == 0.05);
  CHECK(catastrophe_rate(s, End::Minus, 35.0) == doctest::Approx(0.25));
}

TEST_CASE("catastrophe rate floor and slope") {
  CatastropheSpec s;
  s.gamma = 0.03;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> length(0.0, 500.0);
  for (int i = 0; i < 1000; ++i) {
    const double L = length(rng);
    for (End e : {End::Plus, End::Minus}) {
      const double r = catastrophe_rate(s, e, L);
      CHECK(r >= s.lambda_min);
      const double dr = catastrophe_rate(s, e, L + 1.0) - r;
      if (r > s.lambda_min) CHECK(dr == doctest::Approx(s.gamma).epsilon(1e-9));
      CHECK(dr >= 0.0);
    }
  }
}

TEST_CASE("catastrophe spec validation") {
  CatastropheSpec s;
  CHECK_NOTHROW(s.validate());
  s.lambda_min = 0.3;  // above lambda_gs_minus
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.gamma = -1e-3;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.L0 = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("psi examples") {
  const PsiSpec s{1.0, 11.579505070760611};
  CHECK(psi(s, 0.0) == 0.0);
  CHECK(psi(s, s.L_crit) == doctest::Approx(0.36787944117144232).epsilon(1e-14));
  CHECK(psi(s, 100.0 * s.L_crit) == doctest::Approx(0.99004983374916805).epsilon(1e-14));
  CHECK(psi(s, -3.0) == 0.0);
}

TEST_CASE("psi is monotone, bounded and tends to the limits") {
  for (double alpha : {1.0, 1.35, 2.0, 3.1, 7.5, 20.0}) {
    const PsiSpec s{alpha, 10.0};
    double prev = 0.0;
    for (int i = 1; i <= 2000; ++i) {
      const double v = psi(s, 0.25 * i);
      CHECK(v >= prev);
      CHECK(v <= 1.0);
      prev = v;
    }
    CHECK(psi(s, 1e-3) < 1e-6);
    CHECK(psi(s, 1e9) > 1.0 - 1e-6);
  }
}

TEST_CASE("psi spec validation") {
  CHECK_THROWS_AS((PsiSpec{0.5, 1.0}.validate()), Error);
  CHECK_THROWS_AS((PsiSpec{21.0, 1.0}.validate()), Error);
  CHECK_THROWS_AS((PsiSpec{2.0, 0.0}.validate()), Error);
  CHECK_NOTHROW((PsiSpec{20.0, 1.0}.validate()));
}

TEST_CASE("weibull mean") {
  CHECK(weibull_mean(1.0) == doctest::Approx(1.0));
  CHECK(weibull_mean(2.0) == doctest::Approx(std::sqrt(M_PI) / 2.0));
}
