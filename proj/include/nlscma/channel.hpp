#pragma once

#include <string>

#include "nlscma/common.hpp"
#include "nlscma/rng.hpp"

namespace nlscma {

struct ChannelModel {
  enum class Kind { Awgn, Rayleigh, Rician };
  Kind kind = Kind::Awgn;
  double kappa = 0.0;  // Rician K-factor (LoS to scattered power ratio)

  static ChannelModel awgn() { return {Kind::Awgn, 0.0}; }
  static ChannelModel rayleigh() { return {Kind::Rayleigh, 0.0}; }
  static ChannelModel rician(double kappa);

  std::string name() const;
};

ChannelModel parse_channel(const std::string& name, double kappa = 0.0);

/// One coefficient per resource, i.i.d. across resources, unit average power.
CVector draw_channel(const ChannelModel& model, int K, Philox& rng);

/// y = diag(h) w + n with E|n_k|^2 = N0. N0 == 0 is the noiseless mode and
/// draws nothing from rng.
CVector apply_channel(const CVector& h, const CVector& w, double N0, Philox& rng);

// SNR bookkeeping. energy is E||w||^2 per channel use, bits the number of
// information bits it carries (J log2 M).
double db_to_linear(double db);
double linear_to_db(double x);
double n0_from_ebn0_db(double ebn0_db, double energy, int bits);
double n0_from_esn0_db(double esn0_db, double energy, int K);
double ebn0_db_from_n0(double N0, double energy, int bits);
double esn0_db_from_n0(double N0, double energy, int K);

}  // namespace nlscma
