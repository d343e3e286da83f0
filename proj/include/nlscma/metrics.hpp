#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlscma/codebook.hpp"

namespace nlscma {

// Distances are accumulated squared and reported as square roots.

/// Minimum distance over all column pairs of phi. Identical columns count as
/// distance 0, so a non-injective table reports 0.
double med_superimposed(const CMatrix& phi);

/// Squared minimum distance, abandoning the scan as soon as any pair is at or
/// below `stop_at_or_below` (the returned value is then an upper bound no
/// greater than that threshold).
double min_distance_sq(const CMatrix& phi, double stop_at_or_below = -1.0);

/// MED of resource k's local table; 0 when two entries collide.
double med_per_rn(const ResourceTables& tables, int k);

struct ErrorPatternMeds {
  double suep = 0.0;  // pairs differing in exactly one user
  double muep = 0.0;  // pairs differing in two or more users (inf when J = 1)
};

ErrorPatternMeds suep_muep_decomposition(const CMatrix& phi, int M, int J);

/// Number of users whose symbols differ between two mixed-radix columns.
int users_differing(std::int64_t a, std::int64_t b, int M, int J);

struct LayerMeds {
  double dH = 0.0;
  double dM = 0.0;
  double dL = 0.0;
};

/// Minimum distance between labels differing only in one M-ary layer.
LayerMeds layer_meds(const CVector& S, const Labeling& labeling, int M, int df);
LayerMeds layer_meds(const NonlinearCodebook& cb);

struct ClosedForm {
  double med_suep = 0.0;
  double mpd = 0.0;
};

/// med_suep = sqrt(min(dH^2 + dL^2, 2 dM^2)); mpd = min(dH dL, dM^2).
ClosedForm closed_form_suep_mpd(double dH, double dM, double dL);
ClosedForm closed_form_suep_mpd(const LayerMeds& d);

/// sqrt(N + 1) * MED(S).
double muep_lower_bound(double med_s, int N);

/// min over column pairs of prod |a_n,p - a_n,q|^2 over the differing rows.
double mpd_general(const CMatrix& A);

/// min over single-user error pairs of prod_k |w_k - w'_k| over the
/// resources where the codewords differ.
double suep_product_distance(const CMatrix& phi, int M, int J);

/// Union-bound estimate of the per-user symbol error rate under AWGN with
/// total complex noise variance N0 and ML detection.
double union_bound_ser(const CMatrix& phi, int M, int J, double N0);

struct KpiReport {
  double med_phi = 0.0;
  std::vector<double> med_per_rn;
  double mpd = 0.0;
  double med_suep = 0.0;
  double med_muep = 0.0;
  std::optional<LayerMeds> layer_meds;
  std::optional<ClosedForm> closed_form;
  bool full_diversity = false;
  std::optional<double> shape_gain;
  double med_s = 0.0;  // MED of the overlapped constellation (min over resources)
  double muep_bound = 0.0;
  bool injective = false;
};

KpiReport analyze(const NonlinearCodebook& cb);
KpiReport analyze(const LinearCodebook& lcb);
/// Core report from a table encoder (no layer or shape information).
KpiReport analyze(const ResourceTables& tables);

std::string kpi_json(const KpiReport& report, const std::string& name = "");
std::string kpi_table(const std::vector<std::pair<std::string, KpiReport>>& columns);

}  // namespace nlscma
