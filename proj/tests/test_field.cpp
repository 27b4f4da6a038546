#include <doctest.h>

#include <cmath>
#include <vector>

#include "cgm/errors.hpp"
#include "cgm/field.hpp"

using cgm::ChannelParams;
using cgm::Location;

TEST_CASE("correlation: exponential decay in separation") {
  const ChannelParams p;
  CHECK(cgm::correlation(0.0, p) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(cgm::correlation(30.0, p) == doctest::Approx(8.0 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(cgm::correlation(30.0, p) == doctest::Approx(2.9430).epsilon(1e-4));
  CHECK(cgm::correlation(3000.0, p) < 1e-40);
}

TEST_CASE("pathloss: known distances") {
  const ChannelParams p;
  CHECK(cgm::pathloss_db({1.0, 0.0}, p) == doctest::Approx(-80.0).epsilon(1e-15));
  CHECK(cgm::pathloss_db({10.0, 0.0}, p) == doctest::Approx(-102.0).epsilon(1e-14));
  CHECK(cgm::pathloss_db({60.0, 80.0}, p) == doctest::Approx(-124.0).epsilon(1e-14));
  CHECK_THROWS_AS(cgm::pathloss_db({0.0, 0.0}, p), cgm::InvalidArgument);
}

TEST_CASE("synthesize_field: no randomness when alpha = sigma2 = 0") {
  ChannelParams p;
  p.alpha = 0.0;
  p.sigma2 = 0.0;
  const std::vector<Location> locs{{60.0, 80.0}, {5.0, 5.0}};
  const auto f = cgm::synthesize_field(locs, p, 7);
  CHECK(f.gains_db[0] == doctest::Approx(-124.0).epsilon(1e-14));
  CHECK(f.gains_db[1] == cgm::pathloss_db(locs[1], p));
}

TEST_CASE("synthesize_field: gain decomposes into its three terms") {
  const ChannelParams p;
  const std::vector<Location> locs{{10.0, 0.0}, {20.0, 5.0}, {40.0, 40.0}, {3.0, -7.0}};
  const auto f = cgm::synthesize_field(locs, p, 11, 3);
  for (std::size_t i = 0; i < locs.size(); ++i) {
    CHECK(f.gains_db[i] == cgm::pathloss_db(locs[i], p) + f.shadowing[i] + f.multipath[i]);
  }
}

TEST_CASE("synthesize_field: deterministic in (seed, stream)") {
  const ChannelParams p;
  const std::vector<Location> locs{{10.0, 0.0}, {20.0, 5.0}, {40.0, 40.0}};
  const auto a = cgm::synthesize_field(locs, p, 42, 1);
  const auto b = cgm::synthesize_field(locs, p, 42, 1);
  const auto c = cgm::synthesize_field(locs, p, 43, 1);
  const auto d = cgm::synthesize_field(locs, p, 42, 2);
  CHECK(a.gains_db == b.gains_db);
  CHECK(a.gains_db != c.gains_db);
  CHECK(a.gains_db != d.gains_db);
}

TEST_CASE("synthesize_field: coincident points share shadowing") {
  const ChannelParams p;
  const std::vector<Location> locs{{10.0, 10.0}, {25.0, 3.0}, {10.0, 10.0}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = cgm::synthesize_field(locs, p, seed);
    CHECK(f.shadowing[0] == f.shadowing[2]);
    CHECK(f.multipath[0] != f.multipath[2]);
  }
}

TEST_CASE("synthesize_field: nearly coincident points factor with jitter") {
  const ChannelParams p;
  const std::vector<Location> locs{{10.0, 10.0}, {10.0 + 1e-13, 10.0}, {20.0, 10.0}};
  CHECK_NOTHROW(cgm::synthesize_field(locs, p, 1));
}

TEST_CASE("factor_spd: indefinite matrix is rejected") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(cgm::factor_spd(m, 1.0), cgm::DegenerateGeometry);
}

TEST_CASE("synthesize_field: sample covariance matches the model") {
  const ChannelParams p;
  const std::vector<Location> locs{{100.0, 100.0}, {130.0, 100.0}, {100.0, 160.0}};
  const int n = 40000;
  double s00 = 0, s01 = 0, s02 = 0, m0 = 0, mm = 0;
  cgm::Rng rng = cgm::make_stream(2024);
  for (int r = 0; r < n; ++r) {
    const auto f = cgm::synthesize_field(locs, p, rng);
    s00 += f.shadowing[0] * f.shadowing[0];
    s01 += f.shadowing[0] * f.shadowing[1];
    s02 += f.shadowing[0] * f.shadowing[2];
    m0 += f.shadowing[0];
    mm += f.multipath[1] * f.multipath[1];
  }
  CHECK(std::abs(m0 / n) < 4.0 * std::sqrt(8.0 / n));
  CHECK(s00 / n == doctest::Approx(8.0).epsilon(0.05));
  CHECK(s01 / n == doctest::Approx(8.0 * std::exp(-1.0)).epsilon(0.05));
  CHECK(s02 / n == doctest::Approx(8.0 * std::exp(-2.0)).epsilon(0.08));
  CHECK(mm / n == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("ChannelParams::validate rejects out-of-range values") {
  ChannelParams p;
  CHECK_NOTHROW(p.validate());
  p.beta = 0.0;
  CHECK_THROWS_AS(p.validate(), cgm::InvalidArgument);
  p = {};
  p.alpha = -1.0;
  CHECK_THROWS_AS(p.validate(), cgm::InvalidArgument);
  p = {};
  p.sigma2 = -0.5;
  CHECK_THROWS_AS(p.validate(), cgm::InvalidArgument);
}
