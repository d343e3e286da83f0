#include "nlscma/codebook.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

namespace nlscma {

FactorGraph build_factor_graph(const IMatrix& F) {
  require(F.rows() >= 1 && F.cols() >= 1, "empty factor graph");
  for (Eigen::Index i = 0; i < F.size(); ++i)
    require(F.data()[i] == 0 || F.data()[i] == 1, "factor graph entries must be 0 or 1");

  FactorGraph g;
  g.F = F;
  g.K = static_cast<int>(F.rows());
  g.J = static_cast<int>(F.cols());
  const Eigen::VectorXi col_weight = F.colwise().sum().transpose();
  const Eigen::VectorXi row_weight = F.rowwise().sum();
  if ((col_weight.array() != col_weight(0)).any() || (row_weight.array() != row_weight(0)).any() ||
      col_weight(0) == 0 || row_weight(0) == 0)
    throw Error("irregular factor graph");
  g.N = col_weight(0);
  g.df = row_weight(0);

  g.xi.resize(static_cast<std::size_t>(g.K));
  g.zeta.resize(static_cast<std::size_t>(g.J));
  for (int k = 0; k < g.K; ++k)
    for (int j = 0; j < g.J; ++j)
      if (F(k, j)) {
        g.xi[static_cast<std::size_t>(k)].push_back(j);
        g.zeta[static_cast<std::size_t>(j)].push_back(k);
      }
  for (int j = 0; j < g.J; ++j) {
    IMatrix V = IMatrix::Zero(g.K, g.N);
    const auto& res = g.zeta[static_cast<std::size_t>(j)];
    for (int n = 0; n < g.N; ++n) V(res[static_cast<std::size_t>(n)], n) = 1;
    g.V.push_back(std::move(V));
  }
  return g;
}

IMatrix scma_4x6_indicator() {
  IMatrix F(4, 6);
  F << 0, 1, 1, 0, 1, 0,
       1, 0, 1, 0, 0, 1,
       0, 1, 0, 1, 0, 1,
       1, 0, 0, 1, 1, 0;
  return F;
}

BitMapping::BitMapping(std::vector<int> image) : image_(std::move(image)) {
  std::vector<int> sorted = image_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    require(sorted[i] == static_cast<int>(i), "bit mapping is not a permutation");
  require(image_.size() <= 31, "bit mapping too long");
}

BitMapping BitMapping::identity(int L) {
  std::vector<int> image(static_cast<std::size_t>(L));
  std::iota(image.begin(), image.end(), 0);
  return BitMapping(std::move(image));
}

bool BitMapping::is_identity() const {
  for (std::size_t i = 0; i < image_.size(); ++i)
    if (image_[i] != static_cast<int>(i)) return false;
  return true;
}

IMatrix BitMapping::matrix() const {
  const int L = size();
  IMatrix P = IMatrix::Zero(L, L);
  for (int i = 0; i < L; ++i) P(image_[static_cast<std::size_t>(i)], i) = 1;
  return P;
}

std::uint32_t BitMapping::apply(std::uint32_t word) const {
  const int L = size();
  std::uint32_t out = 0;
  for (int i = 0; i < L; ++i) {
    const std::uint32_t bit = (word >> (L - 1 - i)) & 1u;
    out |= bit << (L - 1 - image_[static_cast<std::size_t>(i)]);
  }
  return out;
}

void validate_labeling(const Labeling& labeling, int size) {
  require(static_cast<int>(labeling.size()) == size, "labeling size mismatch");
  std::vector<bool> seen(static_cast<std::size_t>(size), false);
  for (int p : labeling) {
    require(p >= 0 && p < size, "labeling index out of range");
    require(!seen[static_cast<std::size_t>(p)], "labeling is not a bijection");
    seen[static_cast<std::size_t>(p)] = true;
  }
}

LayerAssignment layer_preset(const std::string& name) {
  LayerAssignment L(4, 6);
  if (name == "mapping-29") {
    L << 0, 3, 1, 0, 2, 0,
         2, 0, 3, 0, 0, 1,
         0, 2, 0, 1, 0, 3,
         1, 0, 0, 2, 3, 0;
  } else if (name == "mapping-37") {
    L << 0, 1, 2, 0, 3, 0,
         1, 0, 2, 0, 0, 3,
         0, 3, 0, 2, 0, 1,
         3, 0, 0, 2, 1, 0;
  } else {
    throw Error("unknown layer rule: " + name);
  }
  return L;
}

LayerAssignment sequential_layers(const FactorGraph& graph) {
  LayerAssignment L = LayerAssignment::Zero(graph.K, graph.J);
  for (int k = 0; k < graph.K; ++k) {
    int layer = 1;
    for (int j : graph.xi[static_cast<std::size_t>(k)]) L(k, j) = layer++;
  }
  return L;
}

void validate_layers(const FactorGraph& graph, const LayerAssignment& layers) {
  require(layers.rows() == graph.K && layers.cols() == graph.J, "layer assignment shape mismatch");
  for (int k = 0; k < graph.K; ++k) {
    std::vector<bool> seen(static_cast<std::size_t>(graph.df) + 1, false);
    for (int j = 0; j < graph.J; ++j) {
      const int l = layers(k, j);
      if (graph.F(k, j) == 0) {
        require(l == 0, "layer set on a missing edge");
        continue;
      }
      require(l >= 1 && l <= graph.df, "layer out of range");
      require(!seen[static_cast<std::size_t>(l)], "duplicate layer on a resource");
      seen[static_cast<std::size_t>(l)] = true;
    }
  }
}

int log2_order(int M) {
  require(M >= 2 && (M & (M - 1)) == 0, "modulation order must be a power of two");
  return std::countr_zero(static_cast<unsigned>(M));
}

NonlinearCodebook make_nonlinear(FactorGraph graph, int M, CVector S, Labeling labeling,
                                 LayerAssignment layers, BitMapping P) {
  const int L = graph.df * log2_order(M);
  require(L <= 24, "label space too large");
  const int size = 1 << L;
  require(S.size() == size, "overlapped constellation size must be M^d_f");
  validate_labeling(labeling, size);
  validate_layers(graph, layers);
  require(P.size() == L, "bit mapping length must be d_f * log2(M)");
  for (Eigen::Index i = 0; i < S.size(); ++i)
    require(std::isfinite(S(i).real()) && std::isfinite(S(i).imag()), "non-finite point");

  NonlinearCodebook cb;
  cb.graph = std::move(graph);
  cb.M = M;
  cb.S = std::move(S);
  cb.labeling = std::move(labeling);
  cb.layers = std::move(layers);
  cb.P = std::move(P);
  return cb;
}

std::uint32_t resource_label(const NonlinearCodebook& cb, int k, std::span<const int> symbols) {
  const int m = cb.bits_per_user();
  const int df = cb.graph.df;
  std::uint32_t b = 0;
  for (int j : cb.graph.xi[static_cast<std::size_t>(k)]) {
    const int layer = cb.layers(k, j);
    b |= static_cast<std::uint32_t>(symbols[static_cast<std::size_t>(j)]) << (m * (df - layer));
  }
  return cb.P.apply(b);
}

LinearCodebook build_linear(const CVector& mc_base, const std::vector<std::vector<int>>& perms,
                            const std::vector<double>& angles, const FactorGraph& graph,
                            const IMatrix& rotation) {
  const int M = static_cast<int>(mc_base.size());
  log2_order(M);
  if (static_cast<int>(angles.size()) != graph.df) throw Error("angle count must equal d_f");
  require(static_cast<int>(perms.size()) == graph.N, "permutation count must equal N");
  require(rotation.rows() == graph.K && rotation.cols() == graph.J, "rotation shape mismatch");

  CMatrix mc(graph.N, M);
  for (int n = 0; n < graph.N; ++n) {
    const auto& pi = perms[static_cast<std::size_t>(n)];
    require(static_cast<int>(pi.size()) == M, "permutation length must equal M");
    std::vector<int> sorted = pi;
    std::sort(sorted.begin(), sorted.end());
    for (int m = 0; m < M; ++m) require(sorted[static_cast<std::size_t>(m)] == m, "not a permutation");
    for (int m = 0; m < M; ++m) mc(n, m) = mc_base(pi[static_cast<std::size_t>(m)]);
  }

  std::vector<CMatrix> X;
  for (int j = 0; j < graph.J; ++j) {
    const auto& res = graph.zeta[static_cast<std::size_t>(j)];
    Eigen::VectorXcd theta(graph.N);
    for (int n = 0; n < graph.N; ++n) {
      const int r = rotation(res[static_cast<std::size_t>(n)], j);
      require(r >= 1 && r <= graph.df, "rotation index out of range");
      theta(n) = std::polar(1.0, angles[static_cast<std::size_t>(r - 1)]);
    }
    const CMatrix V = graph.V[static_cast<std::size_t>(j)].cast<Complex>();
    X.push_back(V * theta.asDiagonal() * mc);
  }

  LinearCodebook lcb = make_linear(graph, M, std::move(X));
  lcb.mc = mc;
  lcb.angles = angles;
  lcb.perms = perms;
  return lcb;
}

LinearCodebook make_linear(FactorGraph graph, int M, std::vector<CMatrix> X) {
  log2_order(M);
  require(static_cast<int>(X.size()) == graph.J, "need one codebook per user");
  for (int j = 0; j < graph.J; ++j) {
    const CMatrix& x = X[static_cast<std::size_t>(j)];
    require(x.rows() == graph.K && x.cols() == M, "user codebook must be K x M");
    for (int k = 0; k < graph.K; ++k)
      if (graph.F(k, j) == 0)
        require(x.row(k).cwiseAbs().maxCoeff() == 0.0, "codeword energy on an unconnected resource");
  }
  LinearCodebook lcb;
  lcb.graph = std::move(graph);
  lcb.M = M;
  lcb.X = std::move(X);
  return lcb;
}

std::vector<int> symbols_from_bits(const IMatrix& B, int M) {
  const int m = log2_order(M);
  require(B.rows() == m, "bit matrix must have log2(M) rows");
  std::vector<int> symbols(static_cast<std::size_t>(B.cols()));
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    int s = 0;
    for (int r = 0; r < m; ++r) {
      require(B(r, j) == 0 || B(r, j) == 1, "bit matrix entries must be 0 or 1");
      s = (s << 1) | B(r, j);
    }
    symbols[static_cast<std::size_t>(j)] = s;
  }
  return symbols;
}

IMatrix bits_from_symbols(std::span<const int> symbols, int M) {
  const int m = log2_order(M);
  IMatrix B(m, static_cast<Eigen::Index>(symbols.size()));
  for (std::size_t j = 0; j < symbols.size(); ++j)
    for (int r = 0; r < m; ++r) B(r, static_cast<Eigen::Index>(j)) = (symbols[j] >> (m - 1 - r)) & 1;
  return B;
}

std::int64_t column_index(std::span<const int> symbols, int M) {
  std::int64_t c = 0;
  for (std::size_t j = symbols.size(); j-- > 0;) c = c * M + symbols[j];
  return c;
}

std::vector<int> column_symbols(std::int64_t column, int M, int J) {
  std::vector<int> s(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) {
    s[static_cast<std::size_t>(j)] = static_cast<int>(column % M);
    column /= M;
  }
  return s;
}

std::int64_t column_count(int M, int J) {
  std::int64_t n = 1;
  for (int j = 0; j < J; ++j) n *= M;
  return n;
}

int ResourceTables::local_index(int k, std::span<const int> symbols) const {
  int idx = 0;
  const auto& users = graph.xi[static_cast<std::size_t>(k)];
  for (std::size_t t = users.size(); t-- > 0;)
    idx = idx * M + symbols[static_cast<std::size_t>(users[t])];
  return idx;
}

CVector ResourceTables::encode(std::span<const int> symbols) const {
  require(static_cast<int>(symbols.size()) == graph.J, "one symbol per user required");
  CVector w(graph.K);
  for (int k = 0; k < graph.K; ++k) w(k) = values[static_cast<std::size_t>(k)](local_index(k, symbols));
  return w;
}

bool ResourceTables::locally_injective() const {
  for (const CVector& v : values)
    for (Eigen::Index a = 0; a < v.size(); ++a)
      for (Eigen::Index b = a + 1; b < v.size(); ++b)
        if (v(a) == v(b)) return false;
  return true;
}

namespace {

int local_size(const FactorGraph& g, int M) {
  int n = 1;
  for (int t = 0; t < g.df; ++t) n *= M;
  return n;
}

// Expands a local index on resource k into a full symbol vector (other users 0).
std::vector<int> local_symbols(const FactorGraph& g, int M, int k, int idx) {
  std::vector<int> s(static_cast<std::size_t>(g.J), 0);
  for (int j : g.xi[static_cast<std::size_t>(k)]) {
    s[static_cast<std::size_t>(j)] = idx % M;
    idx /= M;
  }
  return s;
}

}  // namespace

ResourceTables resource_tables(const NonlinearCodebook& cb) {
  ResourceTables t;
  t.graph = cb.graph;
  t.M = cb.M;
  const int n = local_size(cb.graph, cb.M);
  for (int k = 0; k < cb.graph.K; ++k) {
    CVector v(n);
    for (int idx = 0; idx < n; ++idx) {
      const auto s = local_symbols(cb.graph, cb.M, k, idx);
      v(idx) = cb.S(cb.labeling[resource_label(cb, k, s)]);
    }
    t.values.push_back(std::move(v));
  }
  return t;
}

ResourceTables linear_as_nonlinear(const LinearCodebook& lcb) {
  ResourceTables t;
  t.graph = lcb.graph;
  t.M = lcb.M;
  const int n = local_size(lcb.graph, lcb.M);
  for (int k = 0; k < lcb.graph.K; ++k) {
    CVector v(n);
    for (int idx = 0; idx < n; ++idx) {
      const auto s = local_symbols(lcb.graph, lcb.M, k, idx);
      Complex sum{};
      for (int j : lcb.graph.xi[static_cast<std::size_t>(k)])
        sum += lcb.X[static_cast<std::size_t>(j)](k, s[static_cast<std::size_t>(j)]);
      v(idx) = sum;
    }
    t.values.push_back(std::move(v));
  }
  return t;
}

CVector encode_nl(const NonlinearCodebook& cb, const IMatrix& B) {
  require(B.cols() == cb.graph.J, "bit matrix must have J columns");
  const auto s = symbols_from_bits(B, cb.M);
  CVector w(cb.graph.K);
  for (int k = 0; k < cb.graph.K; ++k) w(k) = cb.S(cb.labeling[resource_label(cb, k, s)]);
  return w;
}

CVector encode_linear(const LinearCodebook& lcb, const IMatrix& B) {
  require(B.cols() == lcb.graph.J, "bit matrix must have J columns");
  const auto s = symbols_from_bits(B, lcb.M);
  CVector w = CVector::Zero(lcb.graph.K);
  for (int j = 0; j < lcb.graph.J; ++j)
    w += lcb.X[static_cast<std::size_t>(j)].col(s[static_cast<std::size_t>(j)]);
  return w;
}

CMatrix superimposed_table(const ResourceTables& tables) {
  const int K = tables.graph.K;
  const int J = tables.graph.J;
  const std::int64_t cols = column_count(tables.M, J);
  require(cols <= (std::int64_t{1} << 24), "superimposed table too large to enumerate");
  CMatrix phi(K, cols);
  std::vector<int> s(static_cast<std::size_t>(J), 0);
  for (std::int64_t c = 0; c < cols; ++c) {
    for (int k = 0; k < K; ++k)
      phi(k, c) = tables.values[static_cast<std::size_t>(k)](tables.local_index(k, s));
    for (int j = 0; j < J; ++j) {  // mixed-radix increment
      if (++s[static_cast<std::size_t>(j)] < tables.M) break;
      s[static_cast<std::size_t>(j)] = 0;
    }
  }
  return phi;
}

CMatrix superimposed_table(const NonlinearCodebook& cb) {
  return superimposed_table(resource_tables(cb));
}

CMatrix superimposed_table(const LinearCodebook& lcb) {
  return superimposed_table(linear_as_nonlinear(lcb));
}

LinearCodebook default_linear_baseline() {
  const FactorGraph g = build_factor_graph(scma_4x6_indicator());
  CVector pam(4);
  pam << -3.0, -1.0, 1.0, 3.0;
  pam /= std::sqrt(5.0);
  const std::vector<std::vector<int>> perms{{0, 1, 2, 3}, {1, 3, 0, 2}};
  const double pi = std::numbers::pi;
  const std::vector<double> angles{0.0, pi / 3.0, 2.0 * pi / 3.0};
  return build_linear(pam, perms, angles, g, layer_preset("mapping-29"));
}

}  // namespace nlscma
