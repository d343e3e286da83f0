#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlscma/common.hpp"
#include "nlscma/lattice.hpp"

namespace nlscma {

// Indices are 0-based throughout: resources k in [0, K), users j in [0, J).
struct FactorGraph {
  IMatrix F;
  int K = 0;
  int J = 0;
  int N = 0;   // user degree (resources per user)
  int df = 0;  // resource degree (users per resource)
  std::vector<std::vector<int>> xi;    // users on resource k, ascending
  std::vector<std::vector<int>> zeta;  // resources of user j, ascending
  std::vector<IMatrix> V;              // K x N spreading matrix of user j
};

FactorGraph build_factor_graph(const IMatrix& F);

/// The regular 4 x 6 graph with N = 2, d_f = 3 used by every preset.
IMatrix scma_4x6_indicator();

/// Bit permutation b_bar = P b over L positions (position 0 is the MSB).
class BitMapping {
 public:
  BitMapping() = default;
  /// image[i] is the output position of input bit i.
  explicit BitMapping(std::vector<int> image);
  static BitMapping identity(int L);

  int size() const { return static_cast<int>(image_.size()); }
  const std::vector<int>& image() const { return image_; }
  bool is_identity() const;
  IMatrix matrix() const;
  std::uint32_t apply(std::uint32_t word) const;

  bool operator==(const BitMapping&) const = default;

 private:
  std::vector<int> image_;
};

/// Labeling: label (integer value of b_bar, MSB first) -> index into S.
using Labeling = std::vector<int>;

void validate_labeling(const Labeling& labeling, int size);

/// K x J matrix; 0 where f_kj = 0, otherwise the 1-based block position
/// (1 = most significant) of user j's bits in the label at resource k.
using LayerAssignment = IMatrix;

LayerAssignment layer_preset(const std::string& name);
/// Layers 1..d_f in ascending user order on every resource.
LayerAssignment sequential_layers(const FactorGraph& graph);
void validate_layers(const FactorGraph& graph, const LayerAssignment& layers);

int log2_order(int M);

struct NonlinearCodebook {
  FactorGraph graph;
  int M = 4;
  CVector S;
  Labeling labeling;
  LayerAssignment layers;
  BitMapping P;
  std::optional<LatticeCode> lattice;  // provenance of S when built from one

  int bits_per_user() const { return log2_order(M); }
  int label_bits() const { return graph.df * log2_order(M); }
};

/// Validates every invariant except injectivity of the induced map.
NonlinearCodebook make_nonlinear(FactorGraph graph, int M, CVector S, Labeling labeling,
                                 LayerAssignment layers, BitMapping P);

/// Label at resource k for user symbols `symbols` (one per user).
std::uint32_t resource_label(const NonlinearCodebook& cb, int k, std::span<const int> symbols);

struct LinearCodebook {
  FactorGraph graph;
  int M = 4;
  std::vector<CMatrix> X;  // J matrices of size K x M
  CMatrix mc;              // N x M mother constellation (empty when imported)
  std::vector<double> angles;
  std::vector<std::vector<int>> perms;
};

/// Top-down construction X_j = V_j Theta_j A_MC. Row n of A_MC is
/// mc_base permuted by perms[n]; rotation(k, j) in 1..d_f selects
/// angles[rotation(k, j) - 1] for the row of X_j at resource k.
LinearCodebook build_linear(const CVector& mc_base, const std::vector<std::vector<int>>& perms,
                            const std::vector<double>& angles, const FactorGraph& graph,
                            const IMatrix& rotation);

/// Builds from explicit per-user matrices (the import path).
LinearCodebook make_linear(FactorGraph graph, int M, std::vector<CMatrix> X);

// --- bit matrices and column indexing ---------------------------------------

/// B is log2(M) x J, entries 0/1, MSB in row 0.
std::vector<int> symbols_from_bits(const IMatrix& B, int M);
IMatrix bits_from_symbols(std::span<const int> symbols, int M);

/// Mixed-radix column index sum_j symbols[j] * M^j.
std::int64_t column_index(std::span<const int> symbols, int M);
std::vector<int> column_symbols(std::int64_t column, int M, int J);
std::int64_t column_count(int M, int J);

/// Per-resource lookup encoder shared by nonlinear and linear codebooks.
/// values[k] has M^d_f entries indexed by sum_t s(xi[k][t]) * M^t.
struct ResourceTables {
  FactorGraph graph;
  int M = 4;
  std::vector<CVector> values;

  int local_index(int k, std::span<const int> symbols) const;
  CVector encode(std::span<const int> symbols) const;
  /// Every resource's local table has pairwise distinct entries.
  bool locally_injective() const;
};

ResourceTables resource_tables(const NonlinearCodebook& cb);
/// Subsumption witness: a table encoder whose resource values are the
/// Minkowski sums of the connected users' entries.
ResourceTables linear_as_nonlinear(const LinearCodebook& lcb);

CVector encode_nl(const NonlinearCodebook& cb, const IMatrix& B);
CVector encode_linear(const LinearCodebook& lcb, const IMatrix& B);

/// K x M^J matrix; column c is the codeword for column_symbols(c).
CMatrix superimposed_table(const ResourceTables& tables);
CMatrix superimposed_table(const NonlinearCodebook& cb);
CMatrix superimposed_table(const LinearCodebook& lcb);

/// 4-point PAM mother constellation with two permutations and rotations
/// spaced by pi/3 on the 4x6 graph; a convenient linear baseline.
LinearCodebook default_linear_baseline();

}  // namespace nlscma
