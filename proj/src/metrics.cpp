#include "nlscma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace nlscma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Columns sorted by the real part of their first entry. Any pair whose keys
// differ by at least sqrt(bound) cannot be closer than bound, which lets the
// inner loop stop early.
struct SortedColumns {
  std::vector<Eigen::Index> order;
  std::vector<double> key;
};

SortedColumns sort_columns(const CMatrix& phi) {
  SortedColumns s;
  const Eigen::Index n = phi.cols();
  s.order.resize(static_cast<std::size_t>(n));
  std::iota(s.order.begin(), s.order.end(), Eigen::Index{0});
  std::stable_sort(s.order.begin(), s.order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return phi(0, a).real() < phi(0, b).real();
  });
  s.key.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < s.order.size(); ++i) s.key[i] = phi(0, s.order[i]).real();
  return s;
}

double column_distance_sq(const CMatrix& phi, Eigen::Index a, Eigen::Index b) {
  return (phi.col(a) - phi.col(b)).squaredNorm();
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

double min_distance_sq(const CMatrix& phi, double stop_at_or_below) {
  require(phi.rows() >= 1, "empty table");
  require(phi.cols() >= 2, "degenerate table");
  const SortedColumns s = sort_columns(phi);
  const std::size_t n = s.order.size();
  double best = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dk = s.key[j] - s.key[i];
      if (dk * dk >= best) break;
      const double d = column_distance_sq(phi, s.order[i], s.order[j]);
      if (d < best) {
        best = d;
        if (best <= stop_at_or_below) return best;
      }
    }
  }
  return best;
}

double med_superimposed(const CMatrix& phi) {
  require(phi.cols() >= 2, "degenerate table");
  bool all_same = true;
  for (Eigen::Index c = 1; c < phi.cols() && all_same; ++c)
    all_same = phi.col(c) == phi.col(0);
  if (all_same) throw Error("degenerate table");
  return std::sqrt(min_distance_sq(phi));
}

double med_per_rn(const ResourceTables& tables, int k) {
  require(k >= 0 && k < tables.graph.K, "resource index out of range");
  const CVector& v = tables.values[static_cast<std::size_t>(k)];
  if (v.size() < 2) return 0.0;
  return med(v);
}

int users_differing(std::int64_t a, std::int64_t b, int M, int J) {
  int count = 0;
  for (int j = 0; j < J; ++j) {
    if (a % M != b % M) ++count;
    a /= M;
    b /= M;
  }
  return count;
}

ErrorPatternMeds suep_muep_decomposition(const CMatrix& phi, int M, int J) {
  require(phi.cols() == column_count(M, J), "table width must be M^J");
  require(phi.cols() >= 2, "degenerate table");
  const SortedColumns s = sort_columns(phi);
  const std::size_t n = s.order.size();
  double best_single = kInf;
  double best_multi = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dk = s.key[j] - s.key[i];
      if (dk * dk >= std::max(best_single, best_multi)) break;
      const double d = column_distance_sq(phi, s.order[i], s.order[j]);
      if (d >= std::max(best_single, best_multi)) continue;
      if (users_differing(s.order[i], s.order[j], M, J) == 1)
        best_single = std::min(best_single, d);
      else
        best_multi = std::min(best_multi, d);
    }
  }
  return {std::sqrt(best_single), std::sqrt(best_multi)};
}

LayerMeds layer_meds(const CVector& S, const Labeling& labeling, int M, int df) {
  if (df != 3) throw Error("layered metrics require d_f = 3");
  const int M2 = M * M;
  require(static_cast<int>(labeling.size()) == M2 * M, "labeling size mismatch");
  auto point = [&](int h, int m, int l) { return S(labeling[static_cast<std::size_t>(h * M2 + m * M + l)]); };
  double dH = kInf, dM = kInf, dL = kInf;
  for (int x = 0; x < M; ++x)
    for (int y = 0; y < M; ++y)
      for (int a = 0; a < M; ++a)
        for (int b = a + 1; b < M; ++b) {
          dH = std::min(dH, std::norm(point(a, x, y) - point(b, x, y)));
          dM = std::min(dM, std::norm(point(x, a, y) - point(x, b, y)));
          dL = std::min(dL, std::norm(point(x, y, a) - point(x, y, b)));
        }
  return {std::sqrt(dH), std::sqrt(dM), std::sqrt(dL)};
}

LayerMeds layer_meds(const NonlinearCodebook& cb) {
  return layer_meds(cb.S, cb.labeling, cb.M, cb.graph.df);
}

ClosedForm closed_form_suep_mpd(double dH, double dM, double dL) {
  return {std::sqrt(std::min(dH * dH + dL * dL, 2.0 * dM * dM)), std::min(dH * dL, dM * dM)};
}

ClosedForm closed_form_suep_mpd(const LayerMeds& d) { return closed_form_suep_mpd(d.dH, d.dM, d.dL); }

double muep_lower_bound(double med_s, int N) { return std::sqrt(static_cast<double>(N + 1)) * med_s; }

double mpd_general(const CMatrix& A) {
  require(A.cols() >= 2, "MPD needs at least two codewords");
  double best = kInf;
  for (Eigen::Index p = 0; p < A.cols(); ++p)
    for (Eigen::Index q = p + 1; q < A.cols(); ++q) {
      double prod = 1.0;
      bool any = false;
      for (Eigen::Index n = 0; n < A.rows(); ++n) {
        const double d = std::norm(A(n, p) - A(n, q));
        if (d > 0.0) {
          prod *= d;
          any = true;
        }
      }
      best = std::min(best, any ? prod : 0.0);
    }
  return best;
}

double suep_product_distance(const CMatrix& phi, int M, int J) {
  require(phi.cols() == column_count(M, J), "table width must be M^J");
  double best = kInf;
  std::int64_t stride = 1;
  for (int j = 0; j < J; ++j, stride *= M) {
    for (std::int64_t c = 0; c < phi.cols(); ++c) {
      const int s = static_cast<int>((c / stride) % M);
      for (int t = s + 1; t < M; ++t) {
        const std::int64_t c2 = c + (t - s) * stride;
        double prod = 1.0;
        bool any = false;
        for (Eigen::Index k = 0; k < phi.rows(); ++k) {
          const double d = std::abs(phi(k, c) - phi(k, c2));
          if (d > 0.0) {
            prod *= d;
            any = true;
          }
        }
        best = std::min(best, any ? prod : 0.0);
      }
    }
  }
  return best;
}

double union_bound_ser(const CMatrix& phi, int M, int J, double N0) {
  require(N0 > 0.0, "N0 must be positive");
  const double d2min = min_distance_sq(phi);
  if (d2min == 0.0) return 1.0;
  // Terms beyond 8 standard units past the dominant one are below 1e-14 of it.
  const double xmin = std::sqrt(d2min / (2.0 * N0));
  const double cutoff = 2.0 * N0 * (xmin + 8.0) * (xmin + 8.0);

  const SortedColumns s = sort_columns(phi);
  const std::size_t n = s.order.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dk = s.key[j] - s.key[i];
      if (dk * dk > cutoff) break;
      const double d2 = column_distance_sq(phi, s.order[i], s.order[j]);
      if (d2 > cutoff) continue;
      const int u = users_differing(s.order[i], s.order[j], M, J);
      sum += 2.0 * q_function(std::sqrt(d2 / (2.0 * N0))) * u;
    }
  return sum / (static_cast<double>(n) * J);
}

KpiReport analyze(const ResourceTables& tables) {
  KpiReport r;
  const int M = tables.M;
  const int J = tables.graph.J;
  const CMatrix phi = superimposed_table(tables);
  const ErrorPatternMeds e = suep_muep_decomposition(phi, M, J);
  r.med_suep = e.suep;
  r.med_muep = e.muep;
  r.med_phi = std::min(e.suep, e.muep);
  r.injective = r.med_phi > 0.0;
  r.full_diversity = true;
  r.med_s = kInf;
  for (int k = 0; k < tables.graph.K; ++k) {
    const double d = med_per_rn(tables, k);
    r.med_per_rn.push_back(d);
    r.full_diversity = r.full_diversity && d > 0.0;
    r.med_s = std::min(r.med_s, d);
  }
  r.mpd = suep_product_distance(phi, M, J);
  r.muep_bound = muep_lower_bound(r.med_s, tables.graph.N);
  return r;
}

KpiReport analyze(const NonlinearCodebook& cb) {
  KpiReport r = analyze(resource_tables(cb));
  r.med_s = med(cb.S);
  r.muep_bound = muep_lower_bound(r.med_s, cb.graph.N);
  if (cb.graph.df == 3) {
    r.layer_meds = layer_meds(cb);
    r.closed_form = closed_form_suep_mpd(*r.layer_meds);
  }
  if (cb.lattice) r.shape_gain = shape_gain(*cb.lattice);
  return r;
}

KpiReport analyze(const LinearCodebook& lcb) { return analyze(linear_as_nonlinear(lcb)); }

std::string kpi_json(const KpiReport& r, const std::string& name) {
  nlohmann::ordered_json j;
  if (!name.empty()) j["name"] = name;
  j["med_phi"] = r.med_phi;
  j["med_per_rn"] = r.med_per_rn;
  j["mpd"] = r.mpd;
  j["med_suep"] = r.med_suep;
  j["med_muep"] = r.med_muep;
  if (r.layer_meds)
    j["layer_meds"] = {{"d_H", r.layer_meds->dH}, {"d_M", r.layer_meds->dM}, {"d_L", r.layer_meds->dL}};
  else
    j["layer_meds"] = nullptr;
  if (r.closed_form)
    j["closed_form"] = {{"med_suep", r.closed_form->med_suep}, {"mpd", r.closed_form->mpd}};
  else
    j["closed_form"] = nullptr;
  j["full_diversity"] = r.full_diversity;
  j["injective"] = r.injective;
  if (r.shape_gain)
    j["shape_gain"] = *r.shape_gain;
  else
    j["shape_gain"] = nullptr;
  j["med_s"] = r.med_s;
  j["muep_lower_bound"] = r.muep_bound;
  return j.dump(2);
}

std::string kpi_table(const std::vector<std::pair<std::string, KpiReport>>& columns) {
  auto fmt = [](double v) {
    if (!std::isfinite(v)) return std::string("inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  auto add = [&](const std::string& label, auto&& cell) {
    std::vector<std::string> cells;
    for (const auto& [name, r] : columns) cells.push_back(cell(r));
    rows.emplace_back(label, std::move(cells));
  };
  add("MED(Phi)", [&](const KpiReport& r) { return fmt(r.med_phi); });
  add("MED per RN", [&](const KpiReport& r) {
    return fmt(*std::min_element(r.med_per_rn.begin(), r.med_per_rn.end()));
  });
  add("MPD", [&](const KpiReport& r) { return fmt(r.mpd); });
  add("MED SUEP", [&](const KpiReport& r) { return fmt(r.med_suep); });
  add("MED MUEP", [&](const KpiReport& r) { return fmt(r.med_muep); });
  add("d_H / d_M / d_L", [&](const KpiReport& r) {
    if (!r.layer_meds) return std::string("-");
    return fmt(r.layer_meds->dH) + "/" + fmt(r.layer_meds->dM) + "/" + fmt(r.layer_meds->dL);
  });
  add("Full diversity", [](const KpiReport& r) { return std::string(r.full_diversity ? "yes" : "no"); });
  add("Shape gain", [&](const KpiReport& r) { return r.shape_gain ? fmt(*r.shape_gain) : "-"; });

  std::size_t label_w = std::string("KPI").size();
  for (const auto& row : rows) label_w = std::max(label_w, row.first.size());
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::size_t w = columns[c].first.size();
    for (const auto& row : rows) w = std::max(w, row.second[c].size());
    widths.push_back(w);
  }

  std::ostringstream os;
  auto line = [&](const std::string& label, const std::vector<std::string>& cells) {
    os << label << std::string(label_w - label.size(), ' ');
    for (std::size_t c = 0; c < cells.size(); ++c)
      os << "  " << std::string(widths[c] - cells[c].size(), ' ') << cells[c];
    os << '\n';
  };
  std::vector<std::string> header;
  for (const auto& col : columns) header.push_back(col.first);
  line("KPI", header);
  for (const auto& row : rows) line(row.first, row.second);
  return os.str();
}

}  // namespace nlscma
