#pragma once

#include <cstdint>
#include <vector>

#include "nlscma/codebook.hpp"

namespace nlscma {

inline constexpr double kLlrClamp = 40.0;

struct Beliefs {
  Eigen::MatrixXd log_prob;  // M x J, each column log-normalized
  std::vector<int> symbols;  // per-user argmax, lowest index on ties

  Eigen::MatrixXd probabilities() const { return log_prob.array().exp().matrix(); }
  static Beliefs from_probabilities(const Eigen::MatrixXd& prob);
};

/// Per-user, per-bit LLR log(P(bit = 0) / P(bit = 1)), MSB in row 0, clamped
/// to +/- kLlrClamp.
Eigen::MatrixXd bit_llrs(const Beliefs& beliefs);

struct MapResult {
  std::vector<int> symbols;
  std::int64_t column = 0;
  Eigen::VectorXd log_likelihood;  // -||y - diag(h) phi_c||^2 / N0 per column
};

/// Exhaustive ML (uniform priors) over all columns of phi.
MapResult map_exact(const CVector& y, const CVector& h, const CMatrix& phi, int M, int J, double N0);

struct MpaOptions {
  int iterations = 7;
  bool max_log = false;
  double damping = 0.0;  // weight of the previous user-to-resource message
};

/// Log-domain sum-product detector on the factor graph. Holds scratch
/// buffers, so one instance per thread.
class MpaDetector {
 public:
  MpaDetector(ResourceTables tables, MpaOptions options = {});

  Beliefs detect(const CVector& y, const CVector& h, double N0);

  const MpaOptions& options() const { return options_; }

 private:
  ResourceTables tables_;
  MpaOptions options_;
  int local_size_ = 0;
  // [k][t * M + s]: message between resource k and its t-th user.
  std::vector<std::vector<double>> to_user_, to_resource_, prev_to_resource_;
  std::vector<std::vector<double>> local_ll_;
  std::vector<std::vector<int>> position_;  // position_[j][n]: t of user j on its n-th resource
};

}  // namespace nlscma
