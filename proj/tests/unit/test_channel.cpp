#include <doctest.h>

#include <cmath>

#include "nlscma/channel.hpp"

using namespace nlscma;

TEST_CASE("awgn channel is all ones") {
  Philox rng(1, 0);
  CHECK(draw_channel(ChannelModel::awgn(), 4, rng) == CVector::Ones(4));
}

TEST_CASE("fading moments") {
  Philox rng(7, 0);
  SUBCASE("rayleigh has unit power") {
    double p = 0;
    const int n = 250000;
    for (int i = 0; i < n; ++i) p += draw_channel(ChannelModel::rayleigh(), 4, rng).squaredNorm();
    CHECK(p / (4.0 * n) == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("strong line of sight is nearly deterministic") {
    double s = 0, s2 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double v = std::norm(draw_channel(ChannelModel::rician(1e9), 1, rng)(0));
      s += v;
      s2 += v * v;
    }
    const double mean = s / n;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
    CHECK(s2 / n - mean * mean < 0.01);
  }
  SUBCASE("rician mean and scatter") {
    const double kappa = 3.0;
    Complex m{};
    double p = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const Complex h = draw_channel(ChannelModel::rician(kappa), 1, rng)(0);
      m += h;
      p += std::norm(h);
    }
    CHECK(m.real() / n == doctest::Approx(std::sqrt(kappa / (1 + kappa))).epsilon(0.01));
    CHECK(p / n == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("rician zero equals rayleigh draw for draw") {
  Philox a(3, 3), b(3, 3);
  for (int i = 0; i < 100; ++i)
    CHECK(draw_channel(ChannelModel::rician(0.0), 4, a) == draw_channel(ChannelModel::rayleigh(), 4, b));
}

TEST_CASE("negative kappa") {
  CHECK_THROWS_AS(ChannelModel::rician(-1.0), Error);
  CHECK_THROWS_AS(parse_channel("rician", -0.5), Error);
  CHECK_THROWS_AS(parse_channel("nakagami"), Error);
}

TEST_CASE("apply") {
  CVector h(3), w(3);
  h << Complex{1, 1}, Complex{0.5, 0}, Complex{0, -2};
  w << Complex{1, 0}, Complex{-1, 1}, Complex{2, 2};
  Philox rng(1, 1);
  CHECK(apply_channel(h, w, 0.0, rng) == h.cwiseProduct(w));

  Philox r1(9, 9), r2(9, 9);
  CHECK(apply_channel(h, w, 0.2, r1) == apply_channel(h, w, 0.2, r2));

  const double N0 = 0.37;
  double e = 0;
  const int n = 1000000 / 3;
  for (int i = 0; i < n; ++i) e += (apply_channel(h, w, N0, rng) - h.cwiseProduct(w)).squaredNorm();
  CHECK(e / (3.0 * n) == doctest::Approx(N0).epsilon(0.01));
}

TEST_CASE("snr conversions") {
  // E||w||^2 = 6 over 12 bits at 10 dB Eb/N0.
  CHECK(n0_from_ebn0_db(10.0, 6.0, 12) == doctest::Approx(0.05));
  CHECK(ebn0_db_from_n0(0.05, 6.0, 12) == doctest::Approx(10.0));
  // Per-resource Es/N0 = (6 / 4) / N0.
  CHECK(n0_from_esn0_db(0.0, 6.0, 4) == doctest::Approx(1.5));
  CHECK(esn0_db_from_n0(0.15, 6.0, 4) == doctest::Approx(10.0));
  CHECK(db_to_linear(3.0) == doctest::Approx(1.9952623));
}
