#include <doctest.h>

#include <cmath>

#include "fdra/core.hpp"
#include "test_support.hpp"

using namespace fdra;

namespace {

NetworkScenario one_user(Duplex d, double beta) {
  auto s = make_uniform_scenario(1, 1, 10.0, 10.0, beta, 1.0, 1.0, d);
  return s;
}

}  // namespace

TEST_CASE("effective interference gain") {
  auto s = make_uniform_scenario(2, 1, 1.0, 1.0, 1e-9, 1.0, 1.0, Duplex::Full);
  ChannelRealization ch(2, 1);
  ch.set_user_user(0, 1, 0, 0.5);

  CHECK(effective_interference_gain(s, ch, 0, 0, 0) == 1e-9);
  CHECK(effective_interference_gain(s, ch, 0, 1, 0) == 0.5);
  CHECK(effective_interference_gain(s, ch, 1, 0, 0) == 0.5);

  s.beta = 0.0;
  CHECK(effective_interference_gain(s, ch, 1, 1, 0) == 0.0);

  s.duplex[0] = Duplex::Half;
  CHECK_THROWS_AS(effective_interference_gain(s, ch, 0, 0, 0), ConstraintViolation);
}

TEST_CASE("weighted sum-rate closed forms") {
  SUBCASE("zero power") {
    auto s = one_user(Duplex::Full, 1.0);
    ChannelRealization ch(1, 1);
    ch.set_bs_user(0, 0, 5.0);
    Assignment a(1);
    a.dl_user[0] = 0;
    a.ul_user[0] = 0;
    const auto r = weighted_sum_rate(s, ch, a, PowerAllocation(1));
    CHECK(r.downlink == 0.0);
    CHECK(r.uplink == 0.0);
  }
  SUBCASE("downlink only") {
    auto s = one_user(Duplex::Half, 0.0);
    ChannelRealization ch(1, 1);
    ch.set_bs_user(0, 0, 3.0);
    Assignment a(1);
    a.dl_user[0] = 0;
    PowerAllocation p(1);
    p.dl[0] = 1.0;
    const auto r = weighted_sum_rate(s, ch, a, p);
    CHECK(r.downlink == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(r.uplink == 0.0);
    CHECK(r.sum == r.downlink + r.uplink);
  }
  SUBCASE("full-duplex self pair, no cancellation") {
    auto s = one_user(Duplex::Full, 1.0);
    ChannelRealization ch(1, 1);
    ch.set_bs_user(0, 0, 1.0);
    Assignment a(1);
    a.dl_user[0] = 0;
    a.ul_user[0] = 0;
    PowerAllocation p(1);
    p.dl[0] = 1.0;
    p.ul[0] = 1.0;
    const auto r = weighted_sum_rate(s, ch, a, p);
    // SINR = 1 / (1 + 1) on both links.
    CHECK(r.downlink == doctest::Approx(std::log2(1.5)).epsilon(1e-15));
    CHECK(r.uplink == doctest::Approx(std::log2(1.5)).epsilon(1e-15));
  }
}

TEST_CASE("weighted sum-rate rejects mismatched dimensions") {
  auto s = make_uniform_scenario(2, 3, 1.0, 1.0, 0.0, 1.0, 1.0);
  ChannelRealization ch(2, 3);
  CHECK_THROWS_AS(weighted_sum_rate(s, ch, Assignment(2), PowerAllocation(3)), DimensionMismatch);
  CHECK_THROWS_AS(weighted_sum_rate(s, ch, Assignment(3), PowerAllocation(4)), DimensionMismatch);
  CHECK_THROWS_AS(weighted_sum_rate(s, ChannelRealization(3, 3), Assignment(3), PowerAllocation(3)),
                  DimensionMismatch);
}

TEST_CASE("feasibility checks") {
  auto s = make_uniform_scenario(2, 2, 1.0, 1.0, 0.0, 1.0, 1.0);
  SUBCASE("empty assignment is feasible") {
    const auto r = check_feasible(s, Assignment(2), PowerAllocation(2));
    CHECK(r.feasible);
    CHECK(r.violations.empty());
  }
  SUBCASE("base-station budget") {
    Assignment a(2);
    a.dl_user[0] = 0;
    a.dl_user[1] = 1;
    PowerAllocation p(2);
    p.dl[0] = 1.5;
    p.dl[1] = 0.5;  // total P0 + 1
    const auto r = check_feasible(s, a, p);
    CHECK_FALSE(r.feasible);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].constraint == 4);
  }
  SUBCASE("budget tolerance") {
    Assignment a(2);
    a.dl_user[0] = 0;
    PowerAllocation p(2);
    p.dl[0] = 1.0 + 0.5e-9;
    CHECK(check_feasible(s, a, p).feasible);
    p.dl[0] = 1.0 + 2e-9;
    CHECK_FALSE(check_feasible(s, a, p).feasible);
  }
  SUBCASE("user budget") {
    Assignment a(2);
    a.ul_user[0] = 1;
    a.ul_user[1] = 1;
    PowerAllocation p(2);
    p.ul[0] = 0.6;
    p.ul[1] = 0.6;
    const auto r = check_feasible(s, a, p);
    CHECK_FALSE(r.feasible);
    CHECK(r.violations.at(0).constraint == 5);
  }
  SUBCASE("half-duplex user on both directions") {
    Assignment a(2);
    a.dl_user[1] = 0;
    a.ul_user[1] = 0;
    const auto r = check_feasible(s, a, PowerAllocation(2));
    CHECK_FALSE(r.feasible);
    CHECK(r.violations.at(0).constraint == 11);
    s.duplex[0] = Duplex::Full;
    CHECK(check_feasible(s, a, PowerAllocation(2)).feasible);
  }
  SUBCASE("negative and orphan powers") {
    Assignment a(2);
    a.dl_user[0] = 0;
    PowerAllocation p(2);
    p.dl[0] = -0.1;
    p.ul[1] = 0.2;
    const auto r = check_feasible(s, a, p);
    CHECK_FALSE(r.feasible);
    for (const auto& v : r.violations) CHECK(v.constraint == 6);
  }
  SUBCASE("malformed sizes are reported, not thrown") {
    const auto r = check_feasible(s, Assignment(5), PowerAllocation(2));
    CHECK_FALSE(r.feasible);
  }
}

TEST_CASE("scenario validation") {
  auto s = make_uniform_scenario(2, 2, 1.0, 1.0, 0.5, 1.0, 1.0);
  CHECK_NOTHROW(s.validate());
  s.beta = 1.5;
  CHECK_THROWS(s.validate());
  s.beta = 0.5;
  s.dl_weight.pop_back();
  CHECK_THROWS_AS(s.validate(), DimensionMismatch);
  CHECK_THROWS(make_uniform_scenario(0, 2, 1, 1, 0, 1, 1).validate());
}

TEST_CASE("sum-rate properties over random drops") {
  testing::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto d = testing::random_drop(rng, rng.integer(1, 4), rng.integer(1, 6), rng.uniform());
    auto& s = d.scenario;
    Assignment a(s.num_subchannels);
    PowerAllocation p(s.num_subchannels);
    for (int n = 0; n < s.num_subchannels; ++n) {
      const auto i = static_cast<std::size_t>(n);
      if (rng.coin(0.8)) a.dl_user[i] = rng.integer(0, s.num_users - 1);
      if (rng.coin(0.8)) {
        int j = rng.integer(0, s.num_users - 1);
        if (a.dl_user[i] == j && !s.is_full_duplex(j)) continue;
        a.ul_user[i] = j;
      }
      if (a.dl_user[i]) p.dl[i] = rng.uniform(0.0, 1.0);
      if (a.ul_user[i]) p.ul[i] = rng.uniform(0.0, 1.0);
    }
    const auto base = weighted_sum_rate(s, d.channels, a, p);
    CHECK(base.sum == base.downlink + base.uplink);

    // Raising one BS-user gain never lowers the rate when interference gains stay fixed.
    {
      const int k = rng.integer(0, s.num_users - 1);
      const int n = rng.integer(0, s.num_subchannels - 1);
      auto ch = d.channels;
      ch.set_bs_user(k, n, ch.bs_user(k, n) * rng.uniform(1.0, 3.0));
      CHECK(weighted_sum_rate(s, ch, a, p).sum >= base.sum - 1e-12);
    }

    // Scaling all weights scales the sum-rate.
    {
      const double c = rng.uniform(0.1, 5.0);
      auto scaled = s;
      for (auto& w : scaled.dl_weight) w *= c;
      for (auto& v : scaled.ul_weight) v *= c;
      CHECK(weighted_sum_rate(scaled, d.channels, a, p).sum ==
            doctest::Approx(c * base.sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("decoupled sum-rate equals independent per-link Shannon terms") {
  testing::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto d = testing::random_drop(rng, rng.integer(1, 4), rng.integer(1, 8), 0.0);
    const auto& s = d.scenario;
    Assignment a(s.num_subchannels);
    PowerAllocation p(s.num_subchannels);
    double expected = 0.0;
    for (int n = 0; n < s.num_subchannels; ++n) {
      const auto i = static_cast<std::size_t>(n);
      const int k = rng.integer(0, s.num_users - 1);
      const double g = d.channels.bs_user(k, n);
      if (rng.coin()) {
        a.dl_user[i] = k;
        p.dl[i] = rng.uniform(0.0, 2.0);
        expected += s.dl_weight[static_cast<std::size_t>(k)] *
                    std::log(1.0 + g * p.dl[i] / s.user_noise[static_cast<std::size_t>(k)]) / std::log(2.0);
      } else {
        a.ul_user[i] = k;
        p.ul[i] = rng.uniform(0.0, 2.0);
        expected += s.ul_weight[static_cast<std::size_t>(k)] * std::log(1.0 + g * p.ul[i] / s.bs_noise) / std::log(2.0);
      }
    }
    CHECK(weighted_sum_rate(s, d.channels, a, p).sum == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("power vector layout") {
  PowerAllocation p(3);
  p.dl = {1, 2, 3};
  p.ul = {4, 5, 6};
  const auto flat = p.flatten();
  CHECK(flat == std::vector<double>{1, 2, 3, 4, 5, 6});
  const auto back = PowerAllocation::unflatten(flat);
  CHECK(back.dl == p.dl);
  CHECK(back.ul == p.ul);
  CHECK_THROWS_AS(PowerAllocation::unflatten({1, 2, 3}), DimensionMismatch);
}
