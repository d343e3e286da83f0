#pragma once

#include <numeric>

#include "nlscma/codebook.hpp"
#include "nlscma/lattice.hpp"
#include "nlscma/rng.hpp"

namespace fixtures {

using namespace nlscma;

inline const FactorGraph& graph() {
  static const FactorGraph g = build_factor_graph(scma_4x6_indicator());
  return g;
}

inline const LatticeCode& grid64() {
  static const LatticeCode c = make_lattice_code(LatticeFamily::Gaussian, WindowKind::Rectangular, 64, 1.5);
  return c;
}

inline const LatticeCode& hex64() {
  static const LatticeCode c = make_lattice_code(LatticeFamily::Eisenstein, WindowKind::Circular, 64, 1.5);
  return c;
}

// Index of grid64() point at per-axis level (ix, iy), levels 0..7 from the
// most negative coordinate.
inline int grid_index(int ix, int iy) {
  const double d = med(grid64());
  for (Eigen::Index i = 0; i < 64; ++i) {
    const Complex p = grid64().points(i) / d + Complex{3.5, 3.5};
    if (std::lround(p.real()) == ix && std::lround(p.imag()) == iy) return static_cast<int>(i);
  }
  return -1;
}

// Per-axis level = 4 h + 2 m + l, where (h, m, l) are the axis bits of the
// high, middle and low 2-bit layers. Gives d_H = 4d, d_M = 2d, d_L = d.
inline Labeling nested_grid_labeling() {
  Labeling lab(64);
  for (int H = 0; H < 4; ++H)
    for (int Mi = 0; Mi < 4; ++Mi)
      for (int L = 0; L < 4; ++L) {
        const int ix = 4 * (H >> 1) + 2 * (Mi >> 1) + (L >> 1);
        const int iy = 4 * (H & 1) + 2 * (Mi & 1) + (L & 1);
        lab[static_cast<std::size_t>(H * 16 + Mi * 4 + L)] = grid_index(ix, iy);
      }
  return lab;
}

inline NonlinearCodebook nested_grid_codebook() {
  return make_nonlinear(graph(), 4, grid64().points, nested_grid_labeling(), layer_preset("mapping-37"),
                        BitMapping::identity(6));
}

inline NonlinearCodebook random_codebook(std::uint64_t seed, const LatticeCode& S = hex64()) {
  Philox rng(seed, 99);
  std::vector<int> image(6), lab(64);
  std::iota(image.begin(), image.end(), 0);
  std::iota(lab.begin(), lab.end(), 0);
  rng.shuffle(std::span<int>(image));
  rng.shuffle(std::span<int>(lab));
  return make_nonlinear(graph(), 4, S.points, lab, layer_preset("mapping-29"), BitMapping(image));
}

inline std::vector<int> random_symbols(Philox& rng, int J, int M) {
  std::vector<int> s(static_cast<std::size_t>(J));
  for (int& x : s) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(M)));
  return s;
}

}  // namespace fixtures
