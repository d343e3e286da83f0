#include "nlscma/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include "nlscma/metrics.hpp"
#include "nlscma/rng.hpp"

namespace nlscma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kAlg1Domain = 0xA1;
constexpr std::uint64_t kAlg2Domain = 0xA20;

// Relative tolerance for comparing squared distances that are equal on the
// lattice but differ in the last bits after normalization.
bool approx_equal(double a, double b) {
  if (a == b) return true;
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

int compare(double a, double b) {
  if (approx_equal(a, b)) return 0;
  return a < b ? -1 : 1;
}

unsigned worker_count(int jobs) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return std::max(1u, std::min(hw, static_cast<unsigned>(std::max(1, jobs / 64))));
}

std::string layer_rule_or(const DesignConfig& cfg, const char* fallback) {
  return cfg.layer_rule.empty() ? std::string(fallback) : cfg.layer_rule;
}

LayerAssignment layers_for(const FactorGraph& graph, const std::string& rule) {
  if (rule == "sequential") return sequential_layers(graph);
  LayerAssignment L = layer_preset(rule);
  require(L.rows() == graph.K && L.cols() == graph.J && (L.array() > 0).cast<int>().matrix() == graph.F,
          "layer rule does not match the factor graph");
  return L;
}

int order_from_size(Eigen::Index size, int df) {
  for (int M = 2; M <= 64; M *= 2) {
    Eigen::Index n = 1;
    for (int t = 0; t < df; ++t) n *= M;
    if (n == size) return M;
  }
  throw Error("overlapped constellation size must be M^d_f");
}

}  // namespace

DesignResult algorithm1(const LatticeCode& S, const FactorGraph& graph, const DesignConfig& cfg) {
  const int iterations = cfg.iterations > 0 ? cfg.iterations : kAlgorithm1DefaultIterations;
  const int M = order_from_size(S.size(), graph.df);
  const int L = graph.df * log2_order(M);
  const LayerAssignment layers = layers_for(graph, layer_rule_or(cfg, "mapping-29"));

  auto candidate = [&](int t) {
    Philox rng(cfg.seed, stream_id(kAlg1Domain, static_cast<std::uint64_t>(t)));
    std::vector<int> image(static_cast<std::size_t>(L));
    std::iota(image.begin(), image.end(), 0);
    rng.shuffle(std::span<int>(image));
    Labeling lab(static_cast<std::size_t>(S.size()));
    std::iota(lab.begin(), lab.end(), 0);
    rng.shuffle(std::span<int>(lab));
    return make_nonlinear(graph, M, S.points, std::move(lab), layers, BitMapping(std::move(image)));
  };

  struct Best {
    double d2 = -1.0;
    int trial = -1;
  };
  const unsigned workers = worker_count(iterations);
  std::vector<Best> best(workers);
  auto run = [&](unsigned w) {
    const int begin = static_cast<int>(static_cast<long long>(iterations) * w / workers);
    const int end = static_cast<int>(static_cast<long long>(iterations) * (w + 1) / workers);
    Best& b = best[w];
    for (int t = begin; t < end; ++t) {
      const CMatrix phi = superimposed_table(resource_tables(candidate(t)));
      const double d2 = min_distance_sq(phi, b.d2);
      if (d2 > b.d2) b = {d2, t};
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  // Chunks are in trial order, so a strict improvement keeps the earliest trial.
  Best winner;
  for (const Best& b : best)
    if (b.d2 > winner.d2) winner = b;

  DesignResult r{candidate(winner.trial), std::sqrt(winner.d2), true, 0.0};
  r.codebook.lattice = S;
  return r;
}

std::vector<int> group_by_quadrant(const CVector& S) {
  const int n = static_cast<int>(S.size());
  if (n == 0 || n % 4 != 0) throw Error("quadrant grouping failed");
  const int target = n / 4;
  const double quarter = std::numbers::pi / 2.0;

  std::vector<double> angle(static_cast<std::size_t>(n));
  std::vector<int> q(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double a = std::arg(S(i));
    if (a < 0) a += 2.0 * std::numbers::pi;
    angle[static_cast<std::size_t>(i)] = a;
    // Axis points fall to the counter-clockwise side.
    q[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(a / quarter + 1e-9)) % 4;
  }

  auto angular_gap = [&](int i, int group) {
    const double centre = (group + 0.5) * quarter;
    return std::abs(std::remainder(angle[static_cast<std::size_t>(i)] - centre, 2.0 * std::numbers::pi));
  };

  for (int step = 0; step < 4 * n; ++step) {
    std::array<int, 4> count{};
    for (int g : q) ++count[static_cast<std::size_t>(g)];
    const auto surplus = std::max_element(count.begin(), count.end());
    if (*surplus == target) return q;
    const int g = static_cast<int>(surplus - count.begin());
    int dest = (g + 1) % 4;
    if (count[static_cast<std::size_t>(dest)] >= target && count[static_cast<std::size_t>((g + 3) % 4)] < target)
      dest = (g + 3) % 4;

    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (q[static_cast<std::size_t>(i)] != g) continue;
      if (pick < 0) {
        pick = i;
        continue;
      }
      const int c = compare(angular_gap(i, dest), angular_gap(pick, dest));
      if (c < 0 || (c == 0 && std::abs(S(i)) > std::abs(S(pick)))) pick = i;
    }
    q[static_cast<std::size_t>(pick)] = dest;
  }
  throw Error("quadrant grouping failed");
}

namespace {

// Group-wise search state for one HSB value. `code[a]` is the (MSB, LSB) pair
// of the a-th group point packed as msb * 4 + lsb.
struct GroupScore {
  bool feasible = false;        // dH >= dM >= max(gamma, dL)
  bool floor_feasible = false;  // same chain with gamma = MED(S)^2
  double min_distance = 0.0;    // min(dM, dH)
  int count_at_min = 0;
  double closed_form = 0.0;     // running min(dH^2 + dL^2, 2 dM^2)
  double dL = 0.0;
  double dM = 0.0;  // squared group values, not part of the ordering
  double dH = 0.0;

  int compare_to(const GroupScore& o) const {
    if (feasible != o.feasible) return feasible ? 1 : -1;
    if (floor_feasible != o.floor_feasible) return floor_feasible ? 1 : -1;
    if (int c = compare(min_distance, o.min_distance)) return c;
    if (count_at_min != o.count_at_min) return count_at_min < o.count_at_min ? 1 : -1;
    if (int c = compare(closed_form, o.closed_form)) return c;
    return compare(dL, o.dL);
  }
};

class GroupSearch {
 public:
  GroupSearch(const CVector& S, const std::vector<int>& members, const std::vector<int>& labeling,
              int hsb, double gamma, double floor, double prev_dH, double prev_dM, double prev_dL)
      : S_(S), members_(members), labeling_(labeling), hsb_(hsb), gamma_(gamma), floor_(floor),
        prev_dH_(prev_dH), prev_dM_(prev_dM), prev_dL_(prev_dL) {}

  GroupScore score(const std::array<int, 16>& code) const {
    double dM = kInf, dL = kInf, dH = kInf;
    std::array<double, 120 + 64> pool{};
    int pooled = 0;
    for (int a = 0; a < 16; ++a)
      for (int b = a + 1; b < 16; ++b) {
        const double d = dist(members_[static_cast<std::size_t>(a)], members_[static_cast<std::size_t>(b)]);
        const int ca = code[static_cast<std::size_t>(a)], cb = code[static_cast<std::size_t>(b)];
        if ((ca & 3) == (cb & 3)) {
          dM = std::min(dM, d);
          pool[static_cast<std::size_t>(pooled++)] = d;
        }
        if ((ca >> 2) == (cb >> 2)) dL = std::min(dL, d);
      }
    for (int a = 0; a < 16; ++a)
      for (int h = 0; h < hsb_; ++h) {
        const int other = labeling_[static_cast<std::size_t>(h * 16 + code[static_cast<std::size_t>(a)])];
        const double d = dist(members_[static_cast<std::size_t>(a)], other);
        dH = std::min(dH, d);
        pool[static_cast<std::size_t>(pooled++)] = d;
      }

    GroupScore s;
    auto chain = [&](double g) { return dH >= dM - tol(dM) && dM >= std::max(g, dL) - tol(dM); };
    s.feasible = chain(gamma_);
    s.floor_feasible = chain(floor_);
    s.min_distance = std::min(dM, dH);
    for (int i = 0; i < pooled; ++i)
      if (pool[static_cast<std::size_t>(i)] <= s.min_distance + tol(s.min_distance)) ++s.count_at_min;
    const double all_H = std::min(prev_dH_, dH);
    const double all_M = std::min(prev_dM_, dM);
    const double all_L = std::min(prev_dL_, dL);
    s.closed_form = std::min(all_H + all_L, 2.0 * all_M);
    s.dL = dL;
    s.dM = dM;
    s.dH = dH;
    return s;
  }

 private:
  double dist(int a, int b) const { return std::norm(S_(a) - S_(b)); }
  static double tol(double v) { return 1e-9 * std::max(1.0, v); }

  const CVector& S_;
  const std::vector<int>& members_;
  const std::vector<int>& labeling_;
  int hsb_;
  double gamma_, floor_, prev_dH_, prev_dM_, prev_dL_;
};

}  // namespace

DesignResult algorithm2(const LatticeCode& S, const FactorGraph& graph, const DesignConfig& cfg) {
  require(graph.df == 3, "layered metrics require d_f = 3");
  require(S.size() == 64, "algorithm 2 requires M = 4 and d_f = 3");
  const int iterations = cfg.iterations > 0 ? cfg.iterations : kAlgorithm2DefaultIterations;
  const double med_s = med(S);
  const double floor = med_s * med_s;
  const double gamma = cfg.gamma_th.value_or(4.0 * floor);
  require(gamma >= floor - 1e-12, "gamma_th must be at least MED(S)^2");
  const LayerAssignment layers = layers_for(graph, layer_rule_or(cfg, "mapping-37"));

  const std::vector<int> quadrant = group_by_quadrant(S.points);
  std::array<std::vector<int>, 4> members;
  for (int i = 0; i < 64; ++i) members[static_cast<std::size_t>(quadrant[static_cast<std::size_t>(i)])].push_back(i);

  std::vector<int> labeling(64, -1);
  double dH = kInf, dM = kInf, dL = kInf;

  for (int m = 0; m < 4; ++m) {
    const GroupSearch search(S.points, members[static_cast<std::size_t>(m)], labeling, m, gamma, floor, dH,
                             dM, dL);
    struct Candidate {
      GroupScore score;
      std::array<int, 16> code;
    };

    auto trial = [&](int t) {
      Philox rng(cfg.seed, stream_id(kAlg2Domain + static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(t)));
      std::array<int, 16> code;
      std::iota(code.begin(), code.end(), 0);
      rng.shuffle(std::span<int>(code));
      GroupScore sc = search.score(code);
      // Swap hill-climbing from the random start.
      for (bool improved = true; improved;) {
        improved = false;
        for (int i = 0; i < 16; ++i)
          for (int j = i + 1; j < 16; ++j) {
            std::swap(code[static_cast<std::size_t>(i)], code[static_cast<std::size_t>(j)]);
            const GroupScore s2 = search.score(code);
            if (s2.compare_to(sc) > 0) {
              sc = s2;
              improved = true;
            } else {
              std::swap(code[static_cast<std::size_t>(i)], code[static_cast<std::size_t>(j)]);
            }
          }
      }
      return Candidate{sc, code};
    };
    auto better = [](const Candidate& a, const Candidate& b) {
      const int c = a.score.compare_to(b.score);
      if (c != 0) return c > 0;
      return a.code < b.code;
    };

    const unsigned workers = worker_count(iterations * 8);
    std::vector<std::optional<Candidate>> best(workers);
    auto run = [&](unsigned w) {
      const int begin = static_cast<int>(static_cast<long long>(iterations) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(iterations) * (w + 1) / workers);
      for (int t = begin; t < end; ++t) {
        Candidate c = trial(t);
        if (!best[w] || better(c, *best[w])) best[w] = c;
      }
    };
    if (workers == 1) {
      run(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
      for (auto& th : pool) th.join();
    }
    std::optional<Candidate> winner;
    for (const auto& b : best)
      if (b && (!winner || better(*b, *winner))) winner = b;

    for (int a = 0; a < 16; ++a)
      labeling[static_cast<std::size_t>(m * 16 + winner->code[static_cast<std::size_t>(a)])] =
          members[static_cast<std::size_t>(m)][static_cast<std::size_t>(a)];
    dH = std::min(dH, winner->score.dH);
    dM = std::min(dM, winner->score.dM);
    dL = std::min(dL, winner->score.dL);
  }

  DesignResult r{make_nonlinear(graph, 4, S.points, labeling, layers, BitMapping::identity(6)), 0.0, true, gamma};
  r.codebook.lattice = S;
  const LayerMeds d = layer_meds(r.codebook);
  r.threshold_met = d.dM * d.dM >= gamma - 1e-9 * std::max(1.0, gamma) && d.dH >= d.dM - 1e-12;
  if (!r.threshold_met) r.gamma_th = floor;
  r.med = std::sqrt(min_distance_sq(superimposed_table(r.codebook)));
  return r;
}

}  // namespace nlscma
