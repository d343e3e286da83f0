#include <doctest.h>

#include <cmath>
#include <numbers>
#include <limits>

#include "fixtures.hpp"
#include "nlscma/metrics.hpp"

using namespace nlscma;

namespace {

struct BruteForce {
  double all = 1e300, single = 1e300, multi = 1e300;
};

// Full unpruned scan over every unordered column pair.
BruteForce brute_meds(const CMatrix& phi, int M, int J) {
  BruteForce b;
  for (Eigen::Index a = 0; a < phi.cols(); ++a)
    for (Eigen::Index c = a + 1; c < phi.cols(); ++c) {
      double d = 0;
      for (Eigen::Index k = 0; k < phi.rows(); ++k) d += std::norm(phi(k, a) - phi(k, c));
      b.all = std::min(b.all, d);
      int users = 0;
      for (int j = 0, x = static_cast<int>(a), y = static_cast<int>(c); j < J; ++j, x /= M, y /= M) users += x % M != y % M;
      (users == 1 ? b.single : b.multi) = std::min(users == 1 ? b.single : b.multi, d);
    }
  b.all = std::sqrt(b.all);
  b.single = std::sqrt(b.single);
  b.multi = std::sqrt(b.multi);
  return b;
}

}  // namespace

TEST_CASE("med_superimposed") {
  CMatrix two = CMatrix::Zero(4, 2);
  two(0, 1) = 1.0;
  CHECK(med_superimposed(two) == 1.0);
  CHECK_THROWS_WITH_AS(med_superimposed(CMatrix::Zero(4, 3)), "degenerate table", Error);

  for (std::uint64_t seed : {3u, 4u}) {
    const CMatrix phi = superimposed_table(fixtures::random_codebook(seed));
    const BruteForce b = brute_meds(phi, 4, 6);
    CHECK(med_superimposed(phi) == doctest::Approx(b.all).epsilon(1e-12));
    const ErrorPatternMeds e = suep_muep_decomposition(phi, 4, 6);
    CHECK(e.suep == doctest::Approx(b.single).epsilon(1e-12));
    CHECK(e.muep == doctest::Approx(b.multi).epsilon(1e-12));
    CHECK(std::min(e.suep, e.muep) == med_superimposed(phi));
  }
}

TEST_CASE("early exit returns a value at or below the threshold") {
  const CMatrix phi = superimposed_table(fixtures::random_codebook(8));
  const double exact = min_distance_sq(phi);
  CHECK(min_distance_sq(phi, exact) <= exact);
  CHECK(min_distance_sq(phi, 100.0) <= 100.0);
  CHECK(min_distance_sq(phi, exact * 0.5) == exact);
}

TEST_CASE("error pattern classes") {
  // One user differs, then users 1 and 5 (1-based) differ.
  std::vector<int> s(6, 0), t(6, 0), u(6, 0);
  t[0] = 2;
  u[0] = 1;
  u[4] = 3;
  CHECK(users_differing(column_index(s, 4), column_index(t, 4), 4, 6) == 1);
  CHECK(users_differing(column_index(s, 4), column_index(u, 4), 4, 6) == 2);

  // Every resource touched by the two-user pattern still moves by >= MED(S).
  const NonlinearCodebook cb = fixtures::nested_grid_codebook();
  const CVector w0 = encode_nl(cb, bits_from_symbols(s, 4));
  const CVector w1 = encode_nl(cb, bits_from_symbols(u, 4));
  const double d = med(cb.S);
  for (int k : {0, 1, 3}) CHECK(std::abs(w0(k) - w1(k)) >= d - 1e-12);
}

TEST_CASE("per-resource MED") {
  const NonlinearCodebook cb = fixtures::random_codebook(2);
  const ResourceTables t = resource_tables(cb);
  for (int k = 0; k < 4; ++k) CHECK(med_per_rn(t, k) == med(cb.S));
  CHECK(std::abs(med_per_rn(t, 0) - 0.413) <= 0.005);

  std::vector<CMatrix> X;
  for (int j = 0; j < 6; ++j) {
    CMatrix x = CMatrix::Zero(4, 4);
    for (int k : fixtures::graph().zeta[static_cast<std::size_t>(j)]) x.row(k) << -3, -1, 1, 3;
    X.push_back(x);
  }
  const ResourceTables bad = linear_as_nonlinear(make_linear(fixtures::graph(), 4, X));
  CHECK(med_per_rn(bad, 3) == 0.0);
  const KpiReport r = analyze(bad);
  CHECK_FALSE(r.full_diversity);
  CHECK(r.med_phi == 0.0);
  CHECK_FALSE(r.injective);
}

TEST_CASE("layer MEDs") {
  const NonlinearCodebook cb = fixtures::nested_grid_codebook();
  const double d = med(cb.S);
  const LayerMeds l = layer_meds(cb);
  CHECK(l.dH == doctest::Approx(4 * d));
  CHECK(l.dM == doctest::Approx(2 * d));
  CHECK(l.dL == doctest::Approx(d));

  // Oracle scan over all label pairs differing in exactly one layer.
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const NonlinearCodebook r = fixtures::random_codebook(seed);
    double best[3] = {1e300, 1e300, 1e300};
    for (int a = 0; a < 64; ++a)
      for (int b = 0; b < 64; ++b) {
        const int x = a ^ b;
        int layer = -1;
        if (x && !(x & 0b001111)) layer = 0;
        if (x && !(x & 0b110011)) layer = 1;
        if (x && !(x & 0b111100)) layer = 2;
        if (layer >= 0)
          best[layer] = std::min(best[layer], std::abs(r.S(r.labeling[static_cast<std::size_t>(a)]) -
                                                       r.S(r.labeling[static_cast<std::size_t>(b)])));
      }
    const LayerMeds m = layer_meds(r);
    CHECK(m.dH == doctest::Approx(best[0]).epsilon(1e-12));
    CHECK(m.dM == doctest::Approx(best[1]).epsilon(1e-12));
    CHECK(m.dL == doctest::Approx(best[2]).epsilon(1e-12));
    CHECK(m.dL >= med(r.S));
  }

  CHECK_THROWS_WITH_AS(layer_meds(cb.S, cb.labeling, 4, 2), "layered metrics require d_f = 3", Error);
}

TEST_CASE("closed forms and bounds") {
  const ClosedForm sym = closed_form_suep_mpd(0.5, 0.5, 0.5);
  CHECK(sym.med_suep == doctest::Approx(0.5 * std::sqrt(2.0)));
  CHECK(sym.mpd == doctest::Approx(0.25));

  const NonlinearCodebook cb = fixtures::nested_grid_codebook();
  const ClosedForm c = closed_form_suep_mpd(layer_meds(cb));
  const CMatrix phi = superimposed_table(cb);
  const ErrorPatternMeds e = suep_muep_decomposition(phi, 4, 6);
  CHECK(c.med_suep == doctest::Approx(e.suep).epsilon(1e-9));
  CHECK(c.mpd == doctest::Approx(suep_product_distance(phi, 4, 6)).epsilon(1e-9));

  const double bound = muep_lower_bound(med(cb.S), 2);
  CHECK(bound == doctest::Approx(std::sqrt(3.0) * 0.3779644730092271));
  CHECK(std::abs(bound - 0.655) < 0.001);
  CHECK(e.muep >= bound - 1e-12);
  CHECK(muep_lower_bound(0.0, 2) == 0.0);
}

TEST_CASE("product distances") {
  CMatrix a(1, 2);
  a << Complex{1, 0}, Complex{-1, 0};
  CHECK(mpd_general(a) == 4.0);

  CMatrix b(2, 2);
  b << Complex{1, 0}, Complex{1, 0}, Complex{0, 0}, Complex{3, 0};
  CHECK(mpd_general(b) == 9.0);

  // Rotated QPSK in two dimensions against a direct scan.
  const double th = 0.4;
  CMatrix q(2, 4);
  for (int m = 0; m < 4; ++m) {
    q(0, m) = std::polar(1.0, th + m * std::numbers::pi / 2);
    q(1, m) = std::polar(1.0, -th + ((m * 3) % 4) * std::numbers::pi / 2);
  }
  double best = 1e300;
  for (int p = 0; p < 4; ++p)
    for (int r = p + 1; r < 4; ++r) best = std::min(best, std::norm(q(0, p) - q(0, r)) * std::norm(q(1, p) - q(1, r)));
  CHECK(mpd_general(q) == doctest::Approx(best).epsilon(1e-14));

  const CMatrix phi = superimposed_table(fixtures::random_codebook(6));
  double oracle = 1e300;
  for (Eigen::Index x = 0; x < phi.cols(); ++x)
    for (Eigen::Index y = x + 1; y < phi.cols(); ++y) {
      if (users_differing(x, y, 4, 6) != 1) continue;
      double prod = 1;
      for (int k = 0; k < 4; ++k)
        if (std::abs(phi(k, x) - phi(k, y)) > 0) prod *= std::abs(phi(k, x) - phi(k, y));
      oracle = std::min(oracle, prod);
    }
  CHECK(suep_product_distance(phi, 4, 6) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("metrics are phase invariant and scale linearly") {
  const NonlinearCodebook cb = fixtures::random_codebook(9);
  NonlinearCodebook rotated = cb;
  rotated.S *= std::polar(1.0, 0.7);
  NonlinearCodebook scaled = cb;
  scaled.S *= 2.5;
  const KpiReport a = analyze(cb), b = analyze(rotated), c = analyze(scaled);
  CHECK(b.med_phi == doctest::Approx(a.med_phi).epsilon(1e-12));
  CHECK(b.mpd == doctest::Approx(a.mpd).epsilon(1e-12));
  CHECK(c.med_phi == doctest::Approx(2.5 * a.med_phi).epsilon(1e-12));
  CHECK(c.med_suep == doctest::Approx(2.5 * a.med_suep).epsilon(1e-12));
}

TEST_CASE("union bound") {
  // Single user, two points: exact error probability is Q(d / sqrt(2 N0)).
  const FactorGraph g = build_factor_graph(IMatrix::Ones(1, 1));
  CMatrix X(1, 2);
  X << Complex{-1, 0}, Complex{1, 0};
  const CMatrix phi = superimposed_table(make_linear(g, 2, {X}));
  const double N0 = 0.3;
  CHECK(union_bound_ser(phi, 2, 1, N0) == doctest::Approx(0.5 * std::erfc(2.0 / std::sqrt(2.0 * N0) / std::sqrt(2.0))));

  const CMatrix nl = superimposed_table(fixtures::nested_grid_codebook());
  CHECK(union_bound_ser(nl, 4, 6, 0.01) < union_bound_ser(nl, 4, 6, 0.02));
}

TEST_CASE("KPI report") {
  const KpiReport r = analyze(fixtures::nested_grid_codebook());
  CHECK(r.med_phi == std::min(r.med_suep, r.med_muep));
  CHECK(r.full_diversity);
  CHECK(r.med_per_rn.size() == 4);
  REQUIRE(r.layer_meds);
  const std::string table = kpi_table({{"nested", r}});
  CHECK(table.find("MED(Phi)") != std::string::npos);
  CHECK(kpi_json(r).find("\"med_phi\"") != std::string::npos);
}
