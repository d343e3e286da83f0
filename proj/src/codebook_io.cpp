#include "nlscma/codebook_io.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace nlscma {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json complex_json(Complex z) { return ordered_json::array({z.real(), z.imag()}); }

Complex complex_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error("complex values must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

ordered_json imatrix_json(const IMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

IMatrix imatrix_from(const json& j, int rows, int cols, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) throw Error(std::string(what) + " has the wrong shape");
  IMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) throw Error(std::string(what) + " has the wrong shape");
    for (int c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<int>();
  }
  return m;
}

ordered_json header(const FactorGraph& g, int M, const char* type) {
  ordered_json j;
  j["version"] = kCodebookSchemaVersion;
  j["type"] = type;
  j["K"] = g.K;
  j["J"] = g.J;
  j["M"] = M;
  j["N"] = g.N;
  j["F"] = imatrix_json(g.F);
  return j;
}

ordered_json lattice_json(const LatticeCode& code) {
  ordered_json j;
  j["basis"] = ordered_json::array({complex_json(code.basis.g1), complex_json(code.basis.g2)});
  ordered_json w;
  w["kind"] = to_string(code.window.kind);
  w["center"] = complex_json(code.window.center);
  if (code.window.kind == WindowKind::Circular) {
    w["radius"] = code.window.radius;
  } else {
    w["half_width"] = code.window.half_width;
    w["half_height"] = code.window.half_height;
  }
  j["window"] = std::move(w);
  j["scale"] = code.scale;
  j["target_energy"] = code.target_energy;
  return j;
}

LatticeCode lattice_from(const json& j, const CVector& S) {
  LatticeCode code;
  code.points = S;
  const json& basis = j.at("basis");
  if (!basis.is_array() || basis.size() != 2) throw Error("lattice basis must hold two points");
  code.basis = {complex_from(basis[0]), complex_from(basis[1])};
  const json& w = j.at("window");
  const WindowKind kind = parse_window_kind(w.at("kind").get<std::string>());
  const Complex center = w.contains("center") ? complex_from(w["center"]) : Complex{};
  code.window = kind == WindowKind::Circular
                    ? PartitionWindow::circular(w.at("radius").get<double>(), center)
                    : PartitionWindow::rectangular(w.at("half_width").get<double>(),
                                                   w.at("half_height").get<double>(), center);
  code.scale = j.value("scale", 1.0);
  code.target_energy = j.value("target_energy", 0.0);
  return code;
}

}  // namespace

std::string codebook_to_json(const NonlinearCodebook& cb) {
  ordered_json j = header(cb.graph, cb.M, "nonlinear");
  ordered_json S = ordered_json::array();
  for (Eigen::Index i = 0; i < cb.S.size(); ++i) S.push_back(complex_json(cb.S(i)));
  j["S"] = std::move(S);
  j["labeling"] = cb.labeling;
  j["layers"] = imatrix_json(cb.layers);
  j["P"] = cb.P.image();
  if (cb.lattice) j["lattice"] = lattice_json(*cb.lattice);
  return j.dump(2) + "\n";
}

std::string codebook_to_json(const LinearCodebook& lcb) {
  ordered_json j = header(lcb.graph, lcb.M, "linear");
  ordered_json X = ordered_json::array();
  for (const CMatrix& x : lcb.X) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index m = 0; m < x.cols(); ++m) row.push_back(complex_json(x(k, m)));
      rows.push_back(std::move(row));
    }
    X.push_back(std::move(rows));
  }
  j["X"] = std::move(X);
  return j.dump(2) + "\n";
}

std::string codebook_to_json(const AnyCodebook& cb) {
  return std::visit([](const auto& c) { return codebook_to_json(c); }, cb);
}

AnyCodebook codebook_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("invalid codebook JSON: ") + e.what());
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kCodebookSchemaVersion) throw Error("unsupported codebook version " + std::to_string(version));
    const std::string type = j.at("type").get<std::string>();
    const int K = j.at("K").get<int>();
    const int J = j.at("J").get<int>();
    const int M = j.at("M").get<int>();
    const int N = j.at("N").get<int>();
    require(K >= 1 && J >= 1, "K and J must be positive");
    FactorGraph g = build_factor_graph(imatrix_from(j.at("F"), K, J, "F"));
    require(g.N == N, "N does not match F");

    if (type == "nonlinear") {
      const json& s = j.at("S");
      require(s.is_array(), "S must be an array");
      CVector S(static_cast<Eigen::Index>(s.size()));
      for (std::size_t i = 0; i < s.size(); ++i) S(static_cast<Eigen::Index>(i)) = complex_from(s[i]);
      LayerAssignment layers = imatrix_from(j.at("layers"), K, J, "layers");
      NonlinearCodebook cb = make_nonlinear(std::move(g), M, std::move(S), j.at("labeling").get<Labeling>(),
                                            std::move(layers), BitMapping(j.at("P").get<std::vector<int>>()));
      if (j.contains("lattice")) cb.lattice = lattice_from(j["lattice"], cb.S);
      return cb;
    }
    if (type == "linear") {
      const json& x = j.at("X");
      require(x.is_array() && static_cast<int>(x.size()) == J, "X must hold J codebooks");
      std::vector<CMatrix> X;
      for (const json& user : x) {
        require(user.is_array() && static_cast<int>(user.size()) == K, "each X_j must have K rows");
        CMatrix m(K, M);
        for (int k = 0; k < K; ++k) {
          const json& row = user[static_cast<std::size_t>(k)];
          require(row.is_array() && static_cast<int>(row.size()) == M, "each X_j row must have M entries");
          for (int c = 0; c < M; ++c) m(k, c) = complex_from(row[static_cast<std::size_t>(c)]);
        }
        X.push_back(std::move(m));
      }
      return make_linear(std::move(g), M, std::move(X));
    }
    throw Error("unknown codebook type: " + type);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid codebook file: ") + e.what());
  }
}

AnyCodebook load_codebook(const std::string& path) { return codebook_from_json(read_text_file(path)); }

void save_codebook(const std::string& path, const AnyCodebook& cb) {
  write_text_atomic(path, codebook_to_json(cb));
}

ResourceTables tables_of(const AnyCodebook& cb) {
  if (const auto* nl = std::get_if<NonlinearCodebook>(&cb)) return resource_tables(*nl);
  return linear_as_nonlinear(std::get<LinearCodebook>(cb));
}

std::string constellation_csv(const AnyCodebook& cb) {
  const ResourceTables t = tables_of(cb);
  std::ostringstream os;
  os.precision(17);
  os << "resource,local_index,users,symbols,re,im\n";
  for (int k = 0; k < t.graph.K; ++k) {
    const auto& users = t.graph.xi[static_cast<std::size_t>(k)];
    std::string user_list;
    for (int u : users) user_list += (user_list.empty() ? "" : " ") + std::to_string(u);
    const CVector& v = t.values[static_cast<std::size_t>(k)];
    for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
      std::string syms;
      Eigen::Index rest = idx;
      for (std::size_t n = 0; n < users.size(); ++n) {
        syms += (n ? " " : "") + std::to_string(rest % t.M);
        rest /= t.M;
      }
      os << k << ',' << idx << ',' << user_list << ',' << syms << ',' << v(idx).real() << ',' << v(idx).imag() << '\n';
    }
  }
  return os.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot replace " + path);
  }
}

}  // namespace nlscma
