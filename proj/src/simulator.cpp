#include "nlscma/simulator.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <optional>
#include <thread>

#include <boost/math/distributions/beta.hpp>
#include <json.hpp>

#include "nlscma/metrics.hpp"
#include "nlscma/rng.hpp"

namespace nlscma {

namespace {

constexpr std::uint64_t kSimDomain = 0x5000;

struct Counts {
  std::int64_t frames = 0;
  std::int64_t bit_errors = 0;
  std::int64_t symbol_errors = 0;
};

// Per-thread detection state. The MAP path shares the precomputed table.
class FrameRunner {
 public:
  FrameRunner(const ResourceTables& tables, const CMatrix* phi, const DetectorSettings& det)
      : tables_(tables), phi_(phi), kind_(det.kind) {
    if (kind_ == DetectorSettings::Kind::Mpa) mpa_.emplace(tables, det.mpa);
  }

  std::vector<int> detect(const CVector& y, const CVector& h, double N0) {
    if (kind_ == DetectorSettings::Kind::Map)
      return map_exact(y, h, *phi_, tables_.M, tables_.graph.J, N0).symbols;
    return mpa_->detect(y, h, N0).symbols;
  }

 private:
  const ResourceTables& tables_;
  const CMatrix* phi_;
  DetectorSettings::Kind kind_;
  std::optional<MpaDetector> mpa_;
};

struct Frame {
  std::vector<int> symbols;
  CVector h;
  Philox rng;
};

// The randomness of a frame depends only on (seed, snr index, frame index).
Frame draw_frame(const SimConfig& cfg, int J, int K, int M, std::size_t snr_index, std::int64_t frame) {
  Frame f{std::vector<int>(static_cast<std::size_t>(J)), CVector(),
          Philox(cfg.seed, stream_id(kSimDomain + snr_index, static_cast<std::uint64_t>(frame)))};
  for (int& s : f.symbols) s = static_cast<int>(f.rng.below(static_cast<std::uint64_t>(M)));
  f.h = draw_channel(cfg.channel, K, f.rng);
  return f;
}

Counts run_batch(const SimConfig& cfg, const ResourceTables& tables, FrameRunner& runner, std::size_t snr_index,
                 double N0, std::int64_t first, std::int64_t last) {
  Counts c;
  const int J = tables.graph.J;
  for (std::int64_t f = first; f < last; ++f) {
    Frame fr = draw_frame(cfg, J, tables.graph.K, tables.M, snr_index, f);
    const CVector w = tables.encode(fr.symbols);
    const CVector y = apply_channel(fr.h, w, N0, fr.rng);
    const std::vector<int> hat = runner.detect(y, fr.h, N0);
    for (int j = 0; j < J; ++j) {
      const unsigned diff = static_cast<unsigned>(hat[static_cast<std::size_t>(j)] ^ fr.symbols[static_cast<std::size_t>(j)]);
      c.bit_errors += std::popcount(diff);
      c.symbol_errors += diff != 0;
    }
    ++c.frames;
  }
  return c;
}

double noise_for(const SimConfig& cfg, double snr_db, double energy, int bits, int K) {
  if (cfg.noiseless) return 0.0;
  return cfg.convention == SnrConvention::EbN0 ? n0_from_ebn0_db(snr_db, energy, bits)
                                               : n0_from_esn0_db(snr_db, energy, K);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json config_json(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["snr_grid_db"] = cfg.snr_grid_db;
  j["convention"] = to_string(cfg.convention);
  j["max_frames"] = cfg.max_frames;
  j["min_bit_errors"] = cfg.min_bit_errors;
  j["seed"] = cfg.seed;
  j["channel"] = cfg.channel.name();
  j["kappa"] = cfg.channel.kappa;
  j["detector"] = cfg.detector.kind == DetectorSettings::Kind::Map ? "map" : "mpa";
  j["mpa_iterations"] = cfg.detector.mpa.iterations;
  j["max_log"] = cfg.detector.mpa.max_log;
  j["damping"] = cfg.detector.mpa.damping;
  j["batch_frames"] = cfg.batch_frames;
  j["noiseless"] = cfg.noiseless;
  j["llr_clamp"] = kLlrClamp;
  return j;
}

}  // namespace

std::string to_string(SnrConvention c) { return c == SnrConvention::EbN0 ? "ebn0" : "esn0"; }

SnrConvention parse_convention(const std::string& name) {
  if (name == "ebn0") return SnrConvention::EbN0;
  if (name == "esn0") return SnrConvention::EsN0;
  throw Error("unknown SNR convention: " + name);
}

void validate(const SimConfig& cfg) {
  require(!cfg.snr_grid_db.empty(), "SNR grid is empty");
  for (std::size_t i = 1; i < cfg.snr_grid_db.size(); ++i)
    require(cfg.snr_grid_db[i] > cfg.snr_grid_db[i - 1], "SNR grid must be strictly increasing");
  require(cfg.snr_grid_db.size() < 0x1000, "SNR grid too long");
  require(cfg.max_frames >= 1, "max_frames must be at least 1");
  require(cfg.min_bit_errors >= 0, "min_bit_errors must be non-negative");
  require(cfg.workers >= 1, "workers must be at least 1");
  require(cfg.batch_frames >= 1, "batch size must be at least 1");
  if (cfg.detector.kind == DetectorSettings::Kind::Mpa && cfg.detector.mpa.iterations < 1)
    throw Error("MPA needs at least one iteration");
}

std::vector<double> snr_grid(double start, double stop, double step) {
  require(step > 0.0, "SNR step must be positive");
  require(stop >= start, "SNR stop must not be below start");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = start + i * step;
    if (v > stop + 1e-9) break;
    grid.push_back(v);
  }
  return grid;
}

double mean_codeword_energy(const ResourceTables& tables) {
  double e = 0.0;
  for (const CVector& v : tables.values) e += v.cwiseAbs2().mean();
  return e;
}

BerResult run_ber(const SimConfig& cfg, const ResourceTables& tables, const std::string& label) {
  validate(cfg);
  const CMatrix phi = superimposed_table(tables);
  if (phi.cols() < 2 || min_distance_sq(phi, 0.0) == 0.0) throw Error("degenerate codebook");

  BerResult result;
  result.codebook = label;
  result.config = cfg;
  result.J = tables.graph.J;
  result.M = tables.M;
  result.energy = mean_codeword_energy(tables);
  const int bits_per_frame = tables.graph.J * log2_order(tables.M);

  const unsigned workers = static_cast<unsigned>(cfg.workers);
  std::vector<FrameRunner> runners;
  for (unsigned w = 0; w < workers; ++w) runners.emplace_back(tables, &phi, cfg.detector);

  for (std::size_t i = 0; i < cfg.snr_grid_db.size(); ++i) {
    const double snr = cfg.snr_grid_db[i];
    const double N0 = noise_for(cfg, snr, result.energy, bits_per_frame, tables.graph.K);
    Counts total;
    std::int64_t next = 0;
    bool done = false;
    while (!done) {
      // One round computes up to `workers` consecutive batches; they are merged
      // in order and anything past the stopping point is discarded, so the
      // totals match a serial run exactly.
      std::vector<std::pair<std::int64_t, std::int64_t>> spans;
      for (unsigned w = 0; w < workers && next < cfg.max_frames; ++w) {
        const std::int64_t end = std::min(cfg.max_frames, next + cfg.batch_frames);
        spans.emplace_back(next, end);
        next = end;
      }
      std::vector<Counts> counts(spans.size());
      auto work = [&](std::size_t b) {
        counts[b] = run_batch(cfg, tables, runners[b], i, N0, spans[b].first, spans[b].second);
      };
      if (spans.size() == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t b = 0; b < spans.size(); ++b) pool.emplace_back(work, b);
        for (auto& t : pool) t.join();
      }
      for (const Counts& c : counts) {
        total.frames += c.frames;
        total.bit_errors += c.bit_errors;
        total.symbol_errors += c.symbol_errors;
        if (total.frames >= cfg.max_frames || (cfg.min_bit_errors > 0 && total.bit_errors >= cfg.min_bit_errors)) {
          done = true;
          break;
        }
      }
    }

    BerPoint p;
    p.snr_db = snr;
    p.n0 = N0;
    p.ebn0_db = N0 > 0 ? ebn0_db_from_n0(N0, result.energy, bits_per_frame) : INFINITY;
    p.esn0_db = N0 > 0 ? esn0_db_from_n0(N0, result.energy, tables.graph.K) : INFINITY;
    p.frames = total.frames;
    p.bit_errors = total.bit_errors;
    p.symbol_errors = total.symbol_errors;
    p.ber = static_cast<double>(total.bit_errors) / (static_cast<double>(total.frames) * bits_per_frame);
    p.ser = static_cast<double>(total.symbol_errors) / (static_cast<double>(total.frames) * tables.graph.J);
    result.points.push_back(p);
  }
  return result;
}

std::vector<BerResult> compare(const SimConfig& cfg,
                               const std::vector<std::pair<std::string, ResourceTables>>& codebooks) {
  if (codebooks.empty()) throw Error("no codebooks to compare");
  const ResourceTables& first = codebooks.front().second;
  for (const auto& [name, t] : codebooks)
    if (t.graph.K != first.graph.K || t.graph.J != first.graph.J || t.M != first.M)
      throw Error("codebooks differ in K, J or M");
  std::vector<BerResult> out;
  for (const auto& [name, t] : codebooks) out.push_back(run_ber(cfg, t, name));
  return out;
}

std::string results_csv(const std::vector<BerResult>& results) {
  const bool labelled = results.size() > 1;
  std::string out = labelled ? "codebook," : "";
  out += "snr_db,convention,frames,bit_errors,symbol_errors,ber,ser\n";
  for (const BerResult& r : results)
    for (const BerPoint& p : r.points) {
      if (labelled) out += r.codebook + ",";
      out += fmt_double(p.snr_db) + "," + to_string(r.config.convention) + "," + std::to_string(p.frames) + "," +
             std::to_string(p.bit_errors) + "," + std::to_string(p.symbol_errors) + "," + fmt_double(p.ber) + "," +
             fmt_double(p.ser) + "\n";
    }
  return out;
}

std::string results_json(const std::vector<BerResult>& results) {
  nlohmann::ordered_json j;
  j["schema_version"] = kResultsSchemaVersion;
  j["ebn0_definition"] = "E||w||^2 / (N0 * J * log2(M)), N0 = total complex noise variance";
  if (!results.empty()) j["config"] = config_json(results.front().config);
  j["results"] = nlohmann::ordered_json::array();
  for (const BerResult& r : results) {
    nlohmann::ordered_json e;
    e["codebook"] = r.codebook;
    e["J"] = r.J;
    e["M"] = r.M;
    e["energy"] = r.energy;
    e["points"] = nlohmann::ordered_json::array();
    for (const BerPoint& p : r.points) {
      e["points"].push_back({{"snr_db", p.snr_db},
                             {"ebn0_db", p.ebn0_db},
                             {"esn0_db", p.esn0_db},
                             {"n0", p.n0},
                             {"frames", p.frames},
                             {"bit_errors", p.bit_errors},
                             {"symbol_errors", p.symbol_errors},
                             {"ber", p.ber},
                             {"ser", p.ser}});
    }
    j["results"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::pair<double, double> clopper_pearson(std::int64_t k, std::int64_t n, double confidence) {
  require(n > 0 && k >= 0 && k <= n, "invalid binomial counts");
  const double alpha = 1.0 - confidence;
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  const double lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
  const double hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
  return {lo, hi};
}

}  // namespace nlscma
