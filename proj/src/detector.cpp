#include "nlscma/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlscma {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Keeps exp() arguments finite when the caller asks for noiseless detection.
constexpr double kMinN0 = 1e-12;

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void log_normalize(double* v, int n) {
  double total = kNegInf;
  for (int i = 0; i < n; ++i) total = log_sum_exp(total, v[i]);
  for (int i = 0; i < n; ++i) v[i] -= total;
}

int argmax_first(const double* v, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

Beliefs Beliefs::from_probabilities(const Eigen::MatrixXd& prob) {
  Beliefs b;
  b.log_prob = prob.array().log().matrix();
  for (Eigen::Index j = 0; j < prob.cols(); ++j) {
    log_normalize(b.log_prob.col(j).data(), static_cast<int>(prob.rows()));
    b.symbols.push_back(argmax_first(b.log_prob.col(j).data(), static_cast<int>(prob.rows())));
  }
  return b;
}

Eigen::MatrixXd bit_llrs(const Beliefs& beliefs) {
  const int M = static_cast<int>(beliefs.log_prob.rows());
  const int m = log2_order(M);
  const Eigen::Index J = beliefs.log_prob.cols();
  Eigen::MatrixXd llr(m, J);
  for (Eigen::Index j = 0; j < J; ++j)
    for (int r = 0; r < m; ++r) {
      double zero = kNegInf, one = kNegInf;
      for (int s = 0; s < M; ++s) {
        const double lp = beliefs.log_prob(s, j);
        if ((s >> (m - 1 - r)) & 1)
          one = log_sum_exp(one, lp);
        else
          zero = log_sum_exp(zero, lp);
      }
      double v;
      if (zero == kNegInf && one == kNegInf)
        v = 0.0;
      else if (one == kNegInf)
        v = kLlrClamp;
      else if (zero == kNegInf)
        v = -kLlrClamp;
      else
        v = std::clamp(zero - one, -kLlrClamp, kLlrClamp);
      llr(r, j) = v;
    }
  return llr;
}

MapResult map_exact(const CVector& y, const CVector& h, const CMatrix& phi, int M, int J, double N0) {
  require(y.size() == phi.rows() && h.size() == phi.rows(), "dimension mismatch");
  require(phi.cols() == column_count(M, J), "table width must be M^J");
  const double scale = 1.0 / std::max(N0, kMinN0);
  MapResult r;
  r.log_likelihood.resize(phi.cols());
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    double d = 0.0;
    for (Eigen::Index k = 0; k < phi.rows(); ++k) d += std::norm(y(k) - h(k) * phi(k, c));
    r.log_likelihood(c) = -d * scale;
    if (d < best) {
      best = d;
      r.column = c;
    }
  }
  r.symbols = column_symbols(r.column, M, J);
  return r;
}

MpaDetector::MpaDetector(ResourceTables tables, MpaOptions options)
    : tables_(std::move(tables)), options_(options) {
  if (options_.iterations < 1) throw Error("MPA needs at least one iteration");
  require(options_.damping >= 0.0 && options_.damping < 1.0, "damping must lie in [0, 1)");
  const auto& g = tables_.graph;
  local_size_ = 1;
  for (int t = 0; t < g.df; ++t) local_size_ *= tables_.M;
  const std::size_t msg = static_cast<std::size_t>(g.df * tables_.M);
  to_user_.assign(static_cast<std::size_t>(g.K), std::vector<double>(msg));
  to_resource_ = to_user_;
  prev_to_resource_ = to_user_;
  local_ll_.assign(static_cast<std::size_t>(g.K), std::vector<double>(static_cast<std::size_t>(local_size_)));
  position_.resize(static_cast<std::size_t>(g.J));
  for (int j = 0; j < g.J; ++j)
    for (int k : g.zeta[static_cast<std::size_t>(j)]) {
      const auto& users = g.xi[static_cast<std::size_t>(k)];
      position_[static_cast<std::size_t>(j)].push_back(
          static_cast<int>(std::find(users.begin(), users.end(), j) - users.begin()));
    }
}

Beliefs MpaDetector::detect(const CVector& y, const CVector& h, double N0) {
  const auto& g = tables_.graph;
  const int M = tables_.M;
  const int df = g.df;
  require(y.size() == g.K && h.size() == g.K, "dimension mismatch");
  const double scale = 1.0 / std::max(N0, kMinN0);

  for (int k = 0; k < g.K; ++k) {
    const CVector& v = tables_.values[static_cast<std::size_t>(k)];
    auto& ll = local_ll_[static_cast<std::size_t>(k)];
    for (int idx = 0; idx < local_size_; ++idx) ll[static_cast<std::size_t>(idx)] = -std::norm(y(k) - h(k) * v(idx)) * scale;
    std::fill(to_resource_[static_cast<std::size_t>(k)].begin(), to_resource_[static_cast<std::size_t>(k)].end(),
              -std::log(static_cast<double>(M)));
  }

  std::vector<int> digit(static_cast<std::size_t>(df));
  for (int it = 0; it < options_.iterations; ++it) {
    // Resource update: marginalize the local likelihood over the other users.
    for (int k = 0; k < g.K; ++k) {
      const auto& ll = local_ll_[static_cast<std::size_t>(k)];
      const auto& in = to_resource_[static_cast<std::size_t>(k)];
      auto& out = to_user_[static_cast<std::size_t>(k)];
      std::fill(out.begin(), out.end(), kNegInf);
      for (int idx = 0; idx < local_size_; ++idx) {
        int rest = idx;
        double total = ll[static_cast<std::size_t>(idx)];
        for (int t = 0; t < df; ++t) {
          digit[static_cast<std::size_t>(t)] = rest % M;
          rest /= M;
          total += in[static_cast<std::size_t>(t * M + digit[static_cast<std::size_t>(t)])];
        }
        for (int t = 0; t < df; ++t) {
          const std::size_t slot = static_cast<std::size_t>(t * M + digit[static_cast<std::size_t>(t)]);
          const double contrib = total - in[slot];
          out[slot] = options_.max_log ? std::max(out[slot], contrib) : log_sum_exp(out[slot], contrib);
        }
      }
      for (int t = 0; t < df; ++t) log_normalize(out.data() + t * M, M);
    }

    if (it + 1 == options_.iterations) break;

    // User update: product of the other resources' messages.
    for (int j = 0; j < g.J; ++j) {
      const auto& res = g.zeta[static_cast<std::size_t>(j)];
      const auto& pos = position_[static_cast<std::size_t>(j)];
      for (std::size_t a = 0; a < res.size(); ++a) {
        auto& out = to_resource_[static_cast<std::size_t>(res[a])];
        double* msg = out.data() + pos[a] * M;
        auto& prev = prev_to_resource_[static_cast<std::size_t>(res[a])];
        for (int s = 0; s < M; ++s) {
          prev[static_cast<std::size_t>(pos[a] * M + s)] = msg[s];
          double sum = 0.0;
          for (std::size_t b = 0; b < res.size(); ++b)
            if (b != a) sum += to_user_[static_cast<std::size_t>(res[b])][static_cast<std::size_t>(pos[b] * M + s)];
          msg[s] = sum;
        }
        log_normalize(msg, M);
        if (options_.damping > 0.0) {
          for (int s = 0; s < M; ++s)
            msg[s] = (1.0 - options_.damping) * msg[s] +
                     options_.damping * prev[static_cast<std::size_t>(pos[a] * M + s)];
          log_normalize(msg, M);
        }
      }
    }
  }

  Beliefs b;
  b.log_prob = Eigen::MatrixXd::Zero(M, g.J);
  for (int j = 0; j < g.J; ++j) {
    const auto& res = g.zeta[static_cast<std::size_t>(j)];
    const auto& pos = position_[static_cast<std::size_t>(j)];
    for (std::size_t a = 0; a < res.size(); ++a)
      for (int s = 0; s < M; ++s)
        b.log_prob(s, j) += to_user_[static_cast<std::size_t>(res[a])][static_cast<std::size_t>(pos[a] * M + s)];
    log_normalize(b.log_prob.col(j).data(), M);
    b.symbols.push_back(argmax_first(b.log_prob.col(j).data(), M));
  }
  return b;
}

}  // namespace nlscma
