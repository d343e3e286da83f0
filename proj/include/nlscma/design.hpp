#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlscma/codebook.hpp"
#include "nlscma/lattice.hpp"

namespace nlscma {

enum class GroupStrategy { Quadrant };

struct DesignConfig {
  int iterations = 0;                 // 0 selects the per-algorithm default
  std::optional<double> gamma_th;     // squared distance; default (2 MED(S))^2
  std::uint64_t seed = 1;
  std::string layer_rule;             // empty selects the per-algorithm default
  GroupStrategy group_strategy = GroupStrategy::Quadrant;
};

inline constexpr int kAlgorithm1DefaultIterations = 20000;
inline constexpr int kAlgorithm2DefaultIterations = 5000;

struct DesignResult {
  NonlinearCodebook codebook;
  double med = 0.0;              // exact MED of the superimposed table
  bool threshold_met = true;     // algorithm 2 only
  double gamma_th = 0.0;         // threshold actually required (algorithm 2)
};

/// Best of I_t uniformly random (P, labeling) pairs under exact MED(Phi).
DesignResult algorithm1(const LatticeCode& S, const FactorGraph& graph, const DesignConfig& cfg);

/// Quadrant index (0..3, counter-clockwise from the first quadrant) of every
/// point, balanced so each group holds |S| / 4 points.
std::vector<int> group_by_quadrant(const CVector& S);

/// Group-wise labeling search with the HSB fixed by quadrant, P = I and the
/// balanced layer rule.
DesignResult algorithm2(const LatticeCode& S, const FactorGraph& graph, const DesignConfig& cfg);

}  // namespace nlscma
