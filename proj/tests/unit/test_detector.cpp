#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "nlscma/channel.hpp"
#include "nlscma/detector.hpp"
#include "nlscma/metrics.hpp"

using namespace nlscma;

TEST_CASE("exact MAP") {
  const NonlinearCodebook cb = fixtures::random_codebook(4);
  const CMatrix phi = superimposed_table(cb);
  Philox rng(2, 2);

  SUBCASE("noiseless input is recovered") {
    for (int t = 0; t < 200; ++t) {
      const auto s = fixtures::random_symbols(rng, 6, 4);
      const CVector h = draw_channel(ChannelModel::rayleigh(), 4, rng);
      const CVector y = h.cwiseProduct(phi.col(column_index(s, 4)));
      CHECK(map_exact(y, h, phi, 4, 6, 0.0).symbols == s);
    }
  }
  SUBCASE("returns the argmin of a full scan") {
    for (int t = 0; t < 50; ++t) {
      const auto s = fixtures::random_symbols(rng, 6, 4);
      const CVector h = draw_channel(ChannelModel::rayleigh(), 4, rng);
      const CVector y = apply_channel(h, phi.col(column_index(s, 4)), 0.5, rng);
      const MapResult r = map_exact(y, h, phi, 4, 6, 0.5);
      std::int64_t best = 0;
      double bd = 1e300;
      for (Eigen::Index c = 0; c < phi.cols(); ++c) {
        const double d = (y - h.cwiseProduct(phi.col(c))).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      CHECK(r.column == best);
      CHECK(r.log_likelihood(best) == doctest::Approx(-bd / 0.5));
    }
  }
  SUBCASE("ties go to the lower index") {
    CMatrix two(1, 2);
    two << Complex{-1, 0}, Complex{1, 0};
    const MapResult r = map_exact(CVector::Zero(1), CVector::Ones(1), two, 2, 1, 1.0);
    CHECK(r.column == 0);
  }
}

TEST_CASE("MPA") {
  const NonlinearCodebook cb = fixtures::nested_grid_codebook();
  const ResourceTables t = resource_tables(cb);

  SUBCASE("iteration count") { CHECK_THROWS_AS(MpaDetector(t, MpaOptions{0}), Error); }

  SUBCASE("noiseless frames are recovered") {
    MpaDetector mpa(t, MpaOptions{2});
    Philox rng(8, 8);
    for (int f = 0; f < 1000; ++f) {
      const auto s = fixtures::random_symbols(rng, 6, 4);
      const CVector h = draw_channel(ChannelModel::rayleigh(), 4, rng);
      REQUIRE(mpa.detect(h.cwiseProduct(t.encode(s)), h, 0.0).symbols == s);
    }
  }

  SUBCASE("no information gives uniform beliefs") {
    MpaDetector mpa(t, MpaOptions{7});
    const Beliefs b = mpa.detect(CVector::Zero(4), CVector::Ones(4), 1e12);
    CHECK((b.probabilities().array() - 0.25).abs().maxCoeff() < 1e-6);
  }

  SUBCASE("beliefs are normalized and finite across noise levels") {
    Philox rng(4, 4);
    for (double N0 : {1e-6, 1e-3, 1.0, 1e3}) {
      for (bool max_log : {false, true}) {
        MpaDetector mpa(t, MpaOptions{7, max_log, 0.0});
        const auto s = fixtures::random_symbols(rng, 6, 4);
        const CVector y = apply_channel(CVector::Ones(4), t.encode(s), N0, rng);
        const Beliefs b = mpa.detect(y, CVector::Ones(4), N0);
        CHECK(b.log_prob.allFinite());
        for (int j = 0; j < 6; ++j) CHECK(b.probabilities().col(j).sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(bit_llrs(b).allFinite());
      }
    }
  }

  SUBCASE("single resource: one iteration is exact marginalization") {
    const FactorGraph g = build_factor_graph(IMatrix::Ones(1, 3));
    const NonlinearCodebook one = make_nonlinear(g, 4, fixtures::hex64().points, fixtures::random_codebook(3).labeling,
                                                 sequential_layers(g), BitMapping::identity(6));
    const ResourceTables t1 = resource_tables(one);
    const CMatrix phi = superimposed_table(t1);
    MpaDetector mpa(t1, MpaOptions{1});
    Philox rng(1, 2);
    for (int trial = 0; trial < 20; ++trial) {
      const auto s = fixtures::random_symbols(rng, 3, 4);
      const double N0 = 0.2;
      const CVector y = apply_channel(CVector::Ones(1), t1.encode(s), N0, rng);
      const Beliefs b = mpa.detect(y, CVector::Ones(1), N0);
      Eigen::MatrixXd marg = Eigen::MatrixXd::Zero(4, 3);
      for (Eigen::Index c = 0; c < 64; ++c) {
        const double p = std::exp(-std::norm(y(0) - phi(0, c)) / N0);
        const auto cs = column_symbols(c, 4, 3);
        for (int j = 0; j < 3; ++j) marg(cs[static_cast<std::size_t>(j)], j) += p;
      }
      for (int j = 0; j < 3; ++j) marg.col(j) /= marg.col(j).sum();
      CHECK((b.probabilities() - marg).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("agrees with MAP at moderate SNR") {
    const CMatrix phi = superimposed_table(t);
    MpaDetector mpa(t, MpaOptions{7});
    Philox rng(10, 10);
    const double N0 = n0_from_ebn0_db(10.0, 6.0, 12);
    int agree = 0;
    const int frames = 2000;
    for (int f = 0; f < frames; ++f) {
      const auto s = fixtures::random_symbols(rng, 6, 4);
      const CVector y = apply_channel(CVector::Ones(4), t.encode(s), N0, rng);
      agree += mpa.detect(y, CVector::Ones(4), N0).symbols == map_exact(y, CVector::Ones(4), phi, 4, 6, N0).symbols;
    }
    CHECK(agree >= frames * 995 / 1000);
  }
}

namespace {

int seven_vs_twenty(double ebn0_db, int frames) {
  const ResourceTables t = resource_tables(fixtures::nested_grid_codebook());
  MpaDetector seven(t, MpaOptions{7}), twenty(t, MpaOptions{20});
  Philox rng(21, 21);
  const double N0 = n0_from_ebn0_db(ebn0_db, 6.0, 12);
  int agree = 0;
  for (int f = 0; f < frames; ++f) {
    const auto s = fixtures::random_symbols(rng, 6, 4);
    const CVector y = apply_channel(CVector::Ones(4), t.encode(s), N0, rng);
    agree += seven.detect(y, CVector::Ones(4), N0).symbols == twenty.detect(y, CVector::Ones(4), N0).symbols;
  }
  return agree;
}

}  // namespace

TEST_CASE("mpa stability: decisions settle by seven iterations at 10 dB") {
  CHECK(seven_vs_twenty(10.0, 10000) >= 9990);
}

TEST_CASE("mpa stability: decisions settle by seven iterations at 8 dB") {
  CHECK(seven_vs_twenty(8.0, 10000) >= 9990);
}

TEST_CASE("bit LLRs") {
  SUBCASE("concentrated belief saturates") {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4, 2);
    p(2, 0) = 1.0;  // bits 10
    p(1, 1) = 1.0;  // bits 01
    const Eigen::MatrixXd llr = bit_llrs(Beliefs::from_probabilities(p));
    CHECK(llr(0, 0) == -kLlrClamp);
    CHECK(llr(1, 0) == kLlrClamp);
    CHECK(llr(0, 1) == kLlrClamp);
    CHECK(llr(1, 1) == -kLlrClamp);
  }
  SUBCASE("uniform belief is silent") {
    const Eigen::MatrixXd llr = bit_llrs(Beliefs::from_probabilities(Eigen::MatrixXd::Constant(4, 3, 0.25)));
    CHECK(llr.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("signs agree with the argmax symbol when marginals are clear") {
    Philox rng(12, 0);
    int checked = 0;
    for (int t = 0; t < 10000; ++t) {
      Eigen::MatrixXd p(4, 1);
      for (int s = 0; s < 4; ++s) p(s, 0) = std::pow(rng.uniform(), 4.0);
      p /= p.sum();
      const Beliefs b = Beliefs::from_probabilities(p);
      const Eigen::MatrixXd llr = bit_llrs(b);
      const int s = b.symbols[0];
      // A bit is unambiguous when the argmax symbol alone outweighs the rest.
      if (p(s, 0) <= 0.5) continue;
      ++checked;
      CHECK((llr(0, 0) < 0) == static_cast<bool>((s >> 1) & 1));
      CHECK((llr(1, 0) < 0) == static_cast<bool>(s & 1));
    }
    CHECK(checked > 1000);
  }
}
