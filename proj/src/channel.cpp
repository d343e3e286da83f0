#include "nlscma/channel.hpp"

#include <cmath>

namespace nlscma {

ChannelModel ChannelModel::rician(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw Error("Rician kappa must be finite and non-negative");
  return {Kind::Rician, kappa};
}

std::string ChannelModel::name() const {
  switch (kind) {
    case Kind::Awgn: return "awgn";
    case Kind::Rayleigh: return "rayleigh";
    case Kind::Rician: return "rician";
  }
  return "?";
}

ChannelModel parse_channel(const std::string& name, double kappa) {
  if (name == "awgn") return ChannelModel::awgn();
  if (name == "rayleigh") return ChannelModel::rayleigh();
  if (name == "rician") return ChannelModel::rician(kappa);
  throw Error("unknown channel: " + name);
}

CVector draw_channel(const ChannelModel& model, int K, Philox& rng) {
  require(K >= 1, "K must be positive");
  if (model.kind == ChannelModel::Kind::Awgn) return CVector::Ones(K);
  if (!(model.kappa >= 0.0) || !std::isfinite(model.kappa))
    throw Error("Rician kappa must be finite and non-negative");
  // Rayleigh is the kappa = 0 case and consumes the same draws.
  const double kappa = model.kind == ChannelModel::Kind::Rayleigh ? 0.0 : model.kappa;
  const double los = std::sqrt(kappa / (1.0 + kappa));
  const double scatter = 1.0 / (1.0 + kappa);
  CVector h(K);
  for (int k = 0; k < K; ++k) h(k) = los + rng.complex_normal(scatter);
  return h;
}

CVector apply_channel(const CVector& h, const CVector& w, double N0, Philox& rng) {
  require(h.size() == w.size(), "channel and codeword lengths differ");
  require(N0 >= 0.0, "N0 must be non-negative");
  CVector y = h.cwiseProduct(w);
  if (N0 > 0.0)
    for (Eigen::Index k = 0; k < y.size(); ++k) y(k) += rng.complex_normal(N0);
  return y;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

double n0_from_ebn0_db(double ebn0_db, double energy, int bits) {
  return energy / (bits * db_to_linear(ebn0_db));
}

double n0_from_esn0_db(double esn0_db, double energy, int K) {
  return energy / (K * db_to_linear(esn0_db));
}

double ebn0_db_from_n0(double N0, double energy, int bits) { return linear_to_db(energy / (bits * N0)); }

double esn0_db_from_n0(double N0, double energy, int K) { return linear_to_db(energy / (K * N0)); }

}  // namespace nlscma
