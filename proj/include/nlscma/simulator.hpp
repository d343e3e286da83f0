#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nlscma/channel.hpp"
#include "nlscma/codebook.hpp"
#include "nlscma/detector.hpp"

namespace nlscma {

inline constexpr int kResultsSchemaVersion = 1;

enum class SnrConvention { EbN0, EsN0 };

std::string to_string(SnrConvention c);
SnrConvention parse_convention(const std::string& name);

struct DetectorSettings {
  enum class Kind { Mpa, Map };
  Kind kind = Kind::Mpa;
  MpaOptions mpa;
};

struct SimConfig {
  std::vector<double> snr_grid_db;
  SnrConvention convention = SnrConvention::EbN0;
  std::int64_t max_frames = 100000;
  std::int64_t min_bit_errors = 200;
  std::uint64_t seed = 1;
  ChannelModel channel;
  DetectorSettings detector;
  int workers = 1;
  int batch_frames = 500;  // stopping is checked only between batches
  bool noiseless = false;
};

void validate(const SimConfig& cfg);

/// snr_start, snr_start + step, ... up to and including stop (within 1e-9).
std::vector<double> snr_grid(double start, double stop, double step);

struct BerPoint {
  double snr_db = 0.0;
  double ebn0_db = 0.0;
  double esn0_db = 0.0;
  double n0 = 0.0;
  std::int64_t frames = 0;
  std::int64_t bit_errors = 0;
  std::int64_t symbol_errors = 0;
  double ber = 0.0;
  double ser = 0.0;
};

struct BerResult {
  std::string codebook;  // label used in merged tables
  SimConfig config;
  int J = 0;
  int M = 0;
  double energy = 0.0;   // E||w||^2 per channel use
  std::vector<BerPoint> points;
};

/// Mean of ||w||^2 over uniformly distributed inputs.
double mean_codeword_energy(const ResourceTables& tables);

BerResult run_ber(const SimConfig& cfg, const ResourceTables& tables, const std::string& label = "");

/// All codebooks see the same symbols, fading and noise for each frame index.
std::vector<BerResult> compare(const SimConfig& cfg,
                               const std::vector<std::pair<std::string, ResourceTables>>& codebooks);

std::string results_csv(const std::vector<BerResult>& results);
std::string results_json(const std::vector<BerResult>& results);

/// Two-sided Clopper-Pearson interval for k successes in n trials.
std::pair<double, double> clopper_pearson(std::int64_t k, std::int64_t n, double confidence = 0.95);

}  // namespace nlscma
