#include <doctest.h>

#include <cmath>

#include "fdra/pairwise.hpp"
#include "test_support.hpp"

using namespace fdra;
using namespace fdra::pairwise;

namespace {

// dL/dp (natural log) times its positive common denominator, from the
// finite-difference slope of the reference objective.
double fd_numerator_dl(const PairInstance& s, double p, double q) {
  const double h = 1e-6 * std::max(p, 1e-3);
  const double slope =
      (testing::reference_pair_objective(s, p + h, q) - testing::reference_pair_objective(s, p - h, q)) *
      std::log(2.0) / (2.0 * h);
  const double denom = (s.N_k + s.I_kj * q + s.g_k * p) * (s.N0 + s.beta * p) *
                       (s.N0 + s.beta * p + s.g_j * q);
  return slope * denom;
}

double fd_numerator_ul(const PairInstance& s, double p, double q) {
  const double h = 1e-6 * std::max(q, 1e-3);
  const double slope =
      (testing::reference_pair_objective(s, p, q + h) - testing::reference_pair_objective(s, p, q - h)) *
      std::log(2.0) / (2.0 * h);
  const double denom = (s.N0 + s.beta * p + s.g_j * q) * (s.N_k + s.I_kj * q) *
                       (s.N_k + s.I_kj * q + s.g_k * p);
  return slope * denom;
}

// Central difference with step h, Richardson-extrapolated against h/2 so
// the h^2 truncation term does not swamp the check near sharp optima.
template <class F>
double central_slope(F f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2 * h);
  const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

double eval(const Quadratic& c, double x) { return (c.a * x + c.b) * x + c.c; }

PairInstance unit_instance() {
  PairInstance s;
  s.w_k = s.v_j = 1.0;
  s.g_k = s.g_j = 1.0;
  s.N_k = s.N0 = 1.0;
  s.P_max1 = s.P_max2 = 10.0;
  return s;
}

}  // namespace

TEST_CASE("pair objective") {
  auto s = unit_instance();
  s.g_k = s.g_j = 2.0;
  s.I_kj = s.beta = 1.0;
  CHECK(pair_objective(s, 0.0, 0.0) == 0.0);
  // SINR = 2 / (1 + 1) = 1 on both links.
  CHECK(pair_objective(s, 1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));

  s.I_kj = s.beta = 0.0;
  CHECK(pair_objective(s, 1.0, 3.0) ==
        doctest::Approx(std::log2(3.0) + std::log2(7.0)).epsilon(1e-15));
}

TEST_CASE("downlink stationarity quadratic") {
  auto s = unit_instance();
  s.w_k = 0.7;
  s.v_j = 0.4;
  s.g_k = 0.3;
  s.g_j = 0.8;
  s.N0 = 0.2;
  s.N_k = 0.5;
  s.I_kj = 0.6;

  SUBCASE("beta = 0 leaves only the constant term") {
    s.beta = 0.0;
    const auto c = quadratic_coefficients_dl(s, 2.0);
    CHECK(c.a == 0.0);
    CHECK(c.b == 0.0);
    CHECK(c.c == doctest::Approx(0.7 * 0.3 * 0.04 + 0.7 * 0.3 * 0.8 * 0.2 * 2.0));
  }
  SUBCASE("p_ul = 0") {
    s.beta = 0.3;
    const auto c = quadratic_coefficients_dl(s, 0.0);
    CHECK(c.c == doctest::Approx(0.7 * 0.3 * 0.04));
    CHECK(c.a == doctest::Approx(0.7 * 0.3 * 0.09));
  }
  SUBCASE("matches finite differences on random instances") {
    testing::Rng rng(3);
    for (int t = 0; t < 500; ++t) {
      PairInstance r;
      r.w_k = rng.uniform(0.1, 1);
      r.v_j = rng.uniform(0.1, 1);
      r.g_k = rng.uniform(0.1, 2);
      r.g_j = rng.uniform(0.1, 2);
      r.beta = rng.uniform(0.0, 1);
      r.I_kj = rng.uniform(0.0, 1);
      r.N_k = rng.uniform(0.1, 1);
      r.N0 = rng.uniform(0.1, 1);
      const double p = rng.uniform(0.05, 5), q = rng.uniform(0.05, 5);
      const auto c = quadratic_coefficients_dl(r, q);
      const double scale = std::abs(c.a * p * p) + std::abs(c.b * p) + std::abs(c.c) + 1e-12;
      CHECK(std::abs(eval(c, p) - fd_numerator_dl(r, p, q)) / scale < 1e-6);
    }
  }
}

TEST_CASE("uplink stationarity quadratic") {
  auto s = unit_instance();
  s.w_k = 0.3;
  s.v_j = 0.9;
  s.g_k = 0.5;
  s.g_j = 0.4;
  s.N_k = 0.25;
  s.beta = 0.2;

  SUBCASE("no interference") {
    s.I_kj = 0.0;
    const auto c = quadratic_coefficients_ul(s, 1.0);
    CHECK(c.a == 0.0);
    CHECK(c.b == 0.0);
  }
  SUBCASE("p_dl = 0") {
    s.I_kj = 0.7;
    const auto c = quadratic_coefficients_ul(s, 0.0);
    CHECK(c.c == doctest::Approx(0.9 * 0.4 * 0.0625));
  }
  SUBCASE("matches finite differences on random instances") {
    testing::Rng rng(4);
    for (int t = 0; t < 500; ++t) {
      PairInstance r;
      r.w_k = rng.uniform(0.1, 1);
      r.v_j = rng.uniform(0.1, 1);
      r.g_k = rng.uniform(0.1, 2);
      r.g_j = rng.uniform(0.1, 2);
      r.beta = rng.uniform(0.0, 1);
      r.I_kj = rng.uniform(0.0, 1);
      r.N_k = rng.uniform(0.1, 1);
      r.N0 = rng.uniform(0.1, 1);
      const double p = rng.uniform(0.05, 5), q = rng.uniform(0.05, 5);
      const auto c = quadratic_coefficients_ul(r, p);
      const double scale = std::abs(c.a * q * q) + std::abs(c.b * q) + std::abs(c.c) + 1e-12;
      CHECK(std::abs(eval(c, q) - fd_numerator_ul(r, p, q)) / scale < 1e-6);
    }
  }
}

TEST_CASE("interior root") {
  CHECK(interior_root({1.0, -3.0, 2.0}, 10.0).value() == doctest::Approx(1.0));
  CHECK_FALSE(interior_root({1.0, 0.0, 1.0}, 10.0).has_value());
  CHECK_FALSE(interior_root({0.0, 1.0, 1.0}, 10.0).has_value());
  CHECK(interior_root({0.0, -2.0, 1.0}, 10.0).value() == doctest::Approx(0.5));
  CHECK_FALSE(interior_root({0.0, 0.0, 1.0}, 10.0).has_value());
  // Root outside the open interval.
  CHECK_FALSE(interior_root({1.0, -3.0, 2.0}, 1.0).has_value());
  CHECK_FALSE(interior_root({1.0, -1.0, 0.0}, 10.0).has_value());
  // Tiny coefficients of mixed magnitude, as produced by real channel gains.
  const auto r = interior_root({1e-40, -3e-20, 2e-10}, 1e20);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(2e-10 / 3e-20).epsilon(1e-9));
}

TEST_CASE("solve_pair special cases") {
  SUBCASE("no coupling: both at full power") {
    auto s = unit_instance();
    const auto sol = solve_pair(s);
    CHECK(sol.candidate == Candidate::BothFull);
    CHECK(sol.p_dl == 10.0);
    CHECK(sol.p_ul == 10.0);
  }
  SUBCASE("dead downlink") {
    auto s = unit_instance();
    s.g_k = 0.0;
    s.beta = 0.5;
    const auto sol = solve_pair(s);
    CHECK(sol.candidate == Candidate::UplinkOnly);
    CHECK(sol.p_dl == 0.0);
    CHECK(sol.p_ul == 10.0);
  }
  SUBCASE("nothing to gain") {
    auto s = unit_instance();
    s.g_k = s.g_j = 0.0;
    const auto sol = solve_pair(s);
    CHECK(sol.candidate == Candidate::Silent);
    CHECK(sol.objective == 0.0);
  }
  SUBCASE("exclusive candidate set never pairs") {
    testing::Rng rng(5);
    for (int t = 0; t < 200; ++t) {
      const auto s = testing::random_pair_instance(rng);
      const auto sol = solve_pair(s, CandidateSet::Exclusive);
      CHECK((sol.p_dl == 0.0 || sol.p_ul == 0.0));
      CHECK(sol.objective == doctest::Approx(std::max(pair_objective(s, s.P_max1, 0), pair_objective(s, 0, s.P_max2))));
    }
  }
  SUBCASE("ties go to the smaller total power") {
    auto s = unit_instance();
    s.w_k = 0.0;  // downlink worthless, so (P1, P2) ties (0, P2) when beta = 0
    const auto sol = solve_pair(s);
    CHECK(sol.p_dl == 0.0);
  }
}

TEST_CASE("solve_pair matches a 2001x2001 grid on the reference instance") {
  auto s = unit_instance();
  s.beta = 0.1;
  s.I_kj = 0.2;
  const auto sol = solve_pair(s);
  const double grid = testing::grid_best_brute(s, 2001);
  CHECK(sol.objective >= grid - 1e-3);
  CHECK(sol.objective <= grid + 1e-3);
  CHECK(sol.objective == doctest::Approx(testing::reference_pair_objective(s, sol.p_dl, sol.p_ul)));
}

TEST_CASE("branch-and-bound grid oracle agrees with brute force") {
  testing::Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const auto s = testing::random_pair_instance(rng);
    CHECK(testing::grid_best_bnb(s, 201) == doctest::Approx(testing::grid_best_brute(s, 201)).epsilon(1e-14));
  }
}

TEST_CASE("solve_pair properties on random instances") {
  testing::Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    const auto s = testing::random_pair_instance(rng);
    const auto sol = solve_pair(s);
    CHECK(sol.p_dl >= 0.0);
    CHECK(sol.p_dl <= s.P_max1);
    CHECK(sol.p_ul >= 0.0);
    CHECK(sol.p_ul <= s.P_max2);

    // Grid dominance.
    CHECK(sol.objective >= testing::grid_best_bnb(s, 2001) - 1e-3);

    // Interior points with the other side switched off are dominated.
    if (auto q = interior_root(quadratic_coefficients_ul(s, 0.0), s.P_max2)) {
      CHECK(pair_objective(s, 0.0, *q) <= pair_objective(s, 0.0, s.P_max2) + 1e-12);
    }
    if (auto p = interior_root(quadratic_coefficients_dl(s, 0.0), s.P_max1)) {
      CHECK(pair_objective(s, *p, 0.0) <= pair_objective(s, s.P_max1, 0.0) + 1e-12);
    }

    // Larger weights never lower the optimum.
    auto heavier = s;
    heavier.w_k *= rng.uniform(1.0, 2.0);
    CHECK(solve_pair(heavier).objective >= sol.objective - 1e-12);
    heavier = s;
    heavier.v_j *= rng.uniform(1.0, 2.0);
    CHECK(solve_pair(heavier).objective >= sol.objective - 1e-12);

    // Stationarity of interior winners.
    if (sol.candidate == Candidate::InteriorDownlink) {
      const double d = central_slope([&](double p) { return pair_objective(s, p, sol.p_ul); }, sol.p_dl,
                                     1e-6 * s.P_max1);
      CHECK(std::abs(d) <= 1e-6);
    }
    if (sol.candidate == Candidate::InteriorUplink) {
      const double d = central_slope([&](double q) { return pair_objective(s, sol.p_dl, q); }, sol.p_ul,
                                     1e-6 * s.P_max2);
      CHECK(std::abs(d) <= 1e-6);
    }
  }
}
