#include <doctest.h>

#include <cmath>

#include "fdra/channel.hpp"

using namespace fdra;
using namespace fdra::channel;

TEST_CASE("uniform disk topology") {
  const auto indoor = indoor_template();
  const auto one = sample_topology(indoor, 1, {42});
  REQUIRE(one.size() == 1);
  CHECK(std::hypot(one[0].x, one[0].y) <= 20.0);

  const auto a = sample_topology(indoor, 30, {7});
  const auto b = sample_topology(indoor, 30, {7});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
  }
  const auto c = sample_topology(indoor, 30, {8});
  CHECK(c[0].x != a[0].x);

  // E[r^2] = R^2 / 2 for a uniform disk.
  const auto many = sample_topology(indoor, 100000, {3});
  double acc = 0.0;
  for (const auto& p : many) {
    const double r2 = p.x * p.x + p.y * p.y;
    CHECK_MESSAGE(r2 <= 400.0 + 1e-9, "point outside cell");
    acc += r2;
  }
  const double mean = acc / static_cast<double>(many.size());
  CHECK(mean == doctest::Approx(200.0).epsilon(0.02));

  CHECK_THROWS(sample_topology(indoor, 0, {1}));
}

TEST_CASE("urban Hata path loss") {
  // Hand evaluation: 46.3 + 33.9 log10(2000) - 13.82 log10(30) - a(1.5) + 3.
  CHECK(pathloss_hata_urban(2000, 30, 1.5, 1.0) == doctest::Approx(140.74400841317347).epsilon(1e-12));

  const double slope = 44.9 - 6.55 * std::log10(30.0);
  CHECK(pathloss_hata_urban(2000, 30, 1.5, 10.0) - pathloss_hata_urban(2000, 30, 1.5, 1.0) ==
        doctest::Approx(slope).epsilon(1e-12));
  const double slope_ue = 44.9 - 6.55 * std::log10(1.5);
  CHECK(pathloss_hata_urban(2000, 1.5, 1.5, 0.6) - pathloss_hata_urban(2000, 1.5, 1.5, 0.3) ==
        doctest::Approx(slope_ue * std::log10(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(pathloss_hata_urban(2000, 30, 1.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(pathloss_hata_urban(2000, 30, 1.5, -1.0), std::domain_error);
}

TEST_CASE("ITU indoor path loss") {
  // 20 log10(2000) + 22 + 9 - 28
  CHECK(pathloss_itu_indoor(2000, 10, 22, 9) == doctest::Approx(69.02059991327963).epsilon(1e-12));
  CHECK(pathloss_itu_indoor(2000, 1, 22, 9) == doctest::Approx(20 * std::log10(2000.0) + 9 - 28));
  CHECK(pathloss_itu_indoor(2000, 100, 22, 9) - pathloss_itu_indoor(2000, 10, 22, 9) ==
        doctest::Approx(22.0).epsilon(1e-12));
  // Sub-metre distances clamp to 1 m.
  CHECK(pathloss_itu_indoor(2000, 0.2, 22, 9) == pathloss_itu_indoor(2000, 1, 22, 9));
}

TEST_CASE("noise per sub-channel") {
  const auto t = outdoor_template();
  const double dbm = 10.0 * std::log10(subchannel_noise_watts(t)) + 30.0;
  CHECK(dbm == doctest::Approx(-118.23908740944319).epsilon(1e-12));
}

TEST_CASE("template values") {
  const auto out = outdoor_template();
  CHECK(out.bs_power_dbm == 43.0);
  CHECK(out.cell_radius_m == 1000.0);
  CHECK(out.bs_height_m == 30.0);
  CHECK(out.ue_ue_tx_height_m == 1.5);
  CHECK(out.ue_power_dbm == 23.0);
  CHECK(out.num_subchannels == 64);
  const auto in = indoor_template();
  CHECK(in.bs_power_dbm == 24.0);
  CHECK(in.cell_radius_m == 20.0);
  CHECK(in.itu_distance_coefficient == 22.0);
  CHECK(in.itu_floor_loss_db == 9.0);
  CHECK(dbm_to_watts(43.0) == doctest::Approx(19.952623149688797));
}

TEST_CASE("channel sampling") {
  auto t = indoor_template();
  t.num_subchannels = 16;
  const auto pos = sample_topology(t, 6, {5});

  SUBCASE("pure path loss without fading") {
    const auto ch = sample_channels(t, pos, {9}, Fading::None);
    for (int k = 0; k < 6; ++k) {
      const double d = std::hypot(pos[static_cast<std::size_t>(k)].x, pos[static_cast<std::size_t>(k)].y);
      const double expected = std::pow(10.0, -bs_ue_pathloss_db(t, d) / 10.0);
      for (int n = 0; n < 16; ++n) CHECK(ch.bs_user(k, n) == expected);
    }
  }
  SUBCASE("reciprocity, positivity, determinism") {
    const auto a = sample_channels(t, pos, {9});
    const auto b = sample_channels(t, pos, {9});
    for (int n = 0; n < 16; ++n) {
      for (int k = 0; k < 6; ++k) {
        CHECK(a.bs_user(k, n) > 0.0);
        CHECK(a.bs_user(k, n) == b.bs_user(k, n));
        for (int j = 0; j < 6; ++j) {
          if (j == k) continue;
          CHECK(a.user_user(k, j, n) == a.user_user(j, k, n));
          CHECK(a.user_user(k, j, n) > 0.0);
        }
      }
    }
  }
  SUBCASE("outdoor links use the two Hata parameterisations") {
    auto o = outdoor_template();
    o.num_subchannels = 1;
    const std::vector<Point> two{{300.0, 0.0}, {-200.0, 0.0}};
    const auto ch = sample_channels(o, two, {1}, Fading::None);
    CHECK(ch.bs_user(0, 0) == doctest::Approx(std::pow(10.0, -pathloss_hata_urban(2000, 30, 1.5, 0.3) / 10)));
    CHECK(ch.user_user(0, 1, 0) == doctest::Approx(std::pow(10.0, -pathloss_hata_urban(2000, 1.5, 1.5, 0.5) / 10)));
  }
  SUBCASE("minimum distance clamp") {
    auto o = outdoor_template();
    CHECK(bs_ue_pathloss_db(o, 0.0) == bs_ue_pathloss_db(o, 10.0));
    CHECK(ue_ue_pathloss_db(t, 0.0) == ue_ue_pathloss_db(t, 1.0));
  }
}

TEST_CASE("fading power has unit mean") {
  const auto x = sample_fading_power(1000000, {123});
  double acc = 0.0;
  for (double v : x) {
    REQUIRE(v > 0.0);
    acc += v;
  }
  CHECK(acc / 1e6 == doctest::Approx(1.0).epsilon(0.005));
}
