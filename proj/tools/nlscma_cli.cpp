// nlscma: lattice generation, codebook design, KPI analysis and BER
// simulation for nonlinear SCMA.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlscma/codebook_io.hpp"
#include "nlscma/design.hpp"
#include "nlscma/metrics.hpp"
#include "nlscma/simulator.hpp"

namespace {

using namespace nlscma;

constexpr const char* kVersion = "1.0.0";

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-")
    std::cout << content;
  else
    write_text_atomic(out, content);
}

std::string lattice_json(const LatticeCode& code, LatticeFamily family) {
  nlohmann::ordered_json j;
  j["family"] = to_string(family);
  j["window"] = to_string(code.window.kind);
  j["count"] = code.size();
  j["target_energy"] = code.target_energy;
  j["scale"] = code.scale;
  j["med"] = med(code);
  j["shape_gain"] = shape_gain(code);
  j["points"] = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < code.size(); ++i) j["points"].push_back({code.points(i).real(), code.points(i).imag()});
  return j.dump(2) + "\n";
}

std::string lattice_csv(const LatticeCode& code) {
  std::string s = "index,re,im\n";
  char buf[96];
  for (Eigen::Index i = 0; i < code.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g\n", static_cast<long>(i), code.points(i).real(),
                  code.points(i).imag());
    s += buf;
  }
  return s;
}

struct SimFlags {
  std::string channel = "awgn";
  double kappa = 0.0;
  double snr_start = 0.0, snr_stop = 10.0, snr_step = 2.0;
  std::string convention = "ebn0";
  std::int64_t max_frames = 100000;
  std::int64_t min_errors = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string detector = "mpa";
  int mpa_iters = 7;
  bool max_log = false;
  double damping = 0.0;
  bool noiseless = false;
  int batch = 500;
  std::string out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--channel", channel, "awgn | rayleigh | rician")
        ->check(CLI::IsMember({"awgn", "rayleigh", "rician"}));
    cmd->add_option("--kappa", kappa, "Rician K-factor");
    cmd->add_option("--snr-start", snr_start, "first SNR point [dB]");
    cmd->add_option("--snr-stop", snr_stop, "last SNR point [dB]");
    cmd->add_option("--snr-step", snr_step, "SNR step [dB]");
    cmd->add_option("--convention", convention, "ebn0 | esn0")->check(CLI::IsMember({"ebn0", "esn0"}));
    cmd->add_option("--max-frames", max_frames, "frame cap per SNR point");
    cmd->add_option("--min-errors", min_errors, "stop a point after this many bit errors (0 = never)");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--detector", detector, "mpa | map")->check(CLI::IsMember({"mpa", "map"}));
    cmd->add_option("--mpa-iters", mpa_iters, "MPA iterations");
    cmd->add_flag("--max-log", max_log, "max-log resource update");
    cmd->add_option("--damping", damping, "message damping in [0, 1)");
    cmd->add_flag("--noiseless", noiseless, "no additive noise");
    cmd->add_option("--batch", batch, "frames per stopping check")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "results file (.csv or .json); stdout CSV if omitted");
  }

  SimConfig config() const {
    SimConfig cfg;
    cfg.snr_grid_db = snr_grid(snr_start, snr_stop, snr_step);
    cfg.convention = parse_convention(convention);
    cfg.max_frames = max_frames;
    cfg.min_bit_errors = min_errors;
    cfg.seed = seed;
    cfg.channel = parse_channel(channel, kappa);
    cfg.detector.kind = detector == "map" ? DetectorSettings::Kind::Map : DetectorSettings::Kind::Mpa;
    cfg.detector.mpa.iterations = mpa_iters;
    cfg.detector.mpa.max_log = max_log;
    cfg.detector.mpa.damping = damping;
    cfg.workers = workers;
    cfg.batch_frames = batch;
    cfg.noiseless = noiseless;
    return cfg;
  }

  void write(const std::vector<BerResult>& results) const {
    emit(out, ends_with(out, ".json") ? results_json(results) : results_csv(results));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlscma - nonlinear SCMA codebook design and simulation"};
  app.set_version_flag("--version", std::string("nlscma ") + kVersion + " (codebook schema " +
                                        std::to_string(kCodebookSchemaVersion) + ", results schema " +
                                        std::to_string(kResultsSchemaVersion) + ")");
  app.require_subcommand(1);

  // lattice
  auto* lat = app.add_subcommand("lattice", "generate a normalized lattice code");
  std::string lat_family = "eisenstein", lat_window = "circular", lat_format = "json", lat_out;
  int lat_count = 64;
  double lat_energy = 1.5, lat_aspect = 1.0;
  lat->add_option("--lattice", lat_family, "eisenstein | gaussian")->check(CLI::IsMember({"eisenstein", "gaussian"}));
  lat->add_option("--window", lat_window, "circular | rectangular")->check(CLI::IsMember({"circular", "rectangular"}));
  lat->add_option("--count", lat_count, "number of points")->check(CLI::PositiveNumber);
  lat->add_option("--energy", lat_energy, "target mean energy");
  lat->add_option("--aspect", lat_aspect, "rectangle height / width");
  lat->add_option("--format", lat_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  lat->add_option("--out", lat_out, "output file (stdout if omitted)");

  // design
  auto* des = app.add_subcommand("design", "design a nonlinear codebook");
  std::string des_family = "gaussian", des_window = "rectangular", des_rule, des_out;
  int des_alg = 2, des_iters = 0;
  double des_energy = 0.0;
  std::optional<double> des_gamma;
  std::uint64_t des_seed = 1;
  des->add_option("--lattice", des_family, "eisenstein | gaussian")->check(CLI::IsMember({"eisenstein", "gaussian"}));
  des->add_option("--window", des_window, "circular | rectangular")->check(CLI::IsMember({"circular", "rectangular"}));
  des->add_option("--algorithm", des_alg, "1 | 2")->check(CLI::IsMember({1, 2}));
  des->add_option("--iters", des_iters, "trials (algorithm 1) or trials per group (algorithm 2)");
  des->add_option("--gamma-th", des_gamma, "squared-distance threshold (algorithm 2)");
  des->add_option("--seed", des_seed, "RNG seed");
  des->add_option("--layer-rule", des_rule, "mapping-29 | mapping-37")
      ->check(CLI::IsMember({"mapping-29", "mapping-37"}));
  des->add_option("--energy", des_energy, "mean energy of S (default J/K)");
  des->add_option("--out", des_out, "codebook JSON")->required();

  // analyze
  auto* ana = app.add_subcommand("analyze", "compute codebook KPIs");
  std::vector<std::string> ana_files;
  std::string ana_format = "both";
  ana->add_option("--codebook", ana_files, "codebook JSON (repeatable)")->required();
  ana->add_option("--format", ana_format, "json | table | both")->check(CLI::IsMember({"json", "table", "both"}));

  // simulate / compare
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo BER of one codebook");
  std::string sim_file;
  SimFlags sim_flags;
  sim->add_option("--codebook", sim_file, "codebook JSON")->required();
  sim_flags.attach(sim);

  auto* cmp = app.add_subcommand("compare", "BER of several codebooks on common random numbers");
  std::vector<std::string> cmp_files;
  SimFlags cmp_flags;
  cmp->add_option("--codebook", cmp_files, "codebook JSON (repeatable)")->required();
  cmp_flags.attach(cmp);

  // export
  auto* exp = app.add_subcommand("export", "re-emit a codebook for external tools");
  std::string exp_file, exp_format = "json", exp_out;
  exp->add_option("--codebook", exp_file, "codebook JSON")->required();
  exp->add_option("--format", exp_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  exp->add_option("--out", exp_out, "output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*lat) {
      const auto family = parse_lattice_family(lat_family);
      const LatticeCode code =
          make_lattice_code(family, parse_window_kind(lat_window), lat_count, lat_energy, lat_aspect);
      emit(lat_out, lat_format == "csv" ? lattice_csv(code) : lattice_json(code, family));
    } else if (*des) {
      const FactorGraph graph = build_factor_graph(scma_4x6_indicator());
      const double energy = des_energy > 0.0 ? des_energy : static_cast<double>(graph.J) / graph.K;
      const LatticeCode S = make_lattice_code(parse_lattice_family(des_family), parse_window_kind(des_window),
                                              64, energy);
      DesignConfig cfg;
      cfg.iterations = des_iters;
      cfg.gamma_th = des_gamma;
      cfg.seed = des_seed;
      cfg.layer_rule = des_rule;
      const DesignResult r = des_alg == 1 ? algorithm1(S, graph, cfg) : algorithm2(S, graph, cfg);
      if (!r.threshold_met) std::cerr << "warning: threshold unmet, fell back to MED(S)^2\n";
      std::cerr << "MED(Phi) = " << r.med << "\n";
      save_codebook(des_out, r.codebook);
    } else if (*ana) {
      std::vector<std::pair<std::string, KpiReport>> cols;
      for (const std::string& f : ana_files) {
        const AnyCodebook cb = load_codebook(f);
        KpiReport rep = std::visit([](const auto& c) { return analyze(c); }, cb);
        cols.emplace_back(f, std::move(rep));
      }
      if (ana_format != "table")
        for (const auto& [name, rep] : cols) std::cout << kpi_json(rep, name) << "\n";
      if (ana_format != "json") std::cout << kpi_table(cols);
    } else if (*sim) {
      const ResourceTables t = tables_of(load_codebook(sim_file));
      sim_flags.write({run_ber(sim_flags.config(), t, sim_file)});
    } else if (*cmp) {
      std::vector<std::pair<std::string, ResourceTables>> books;
      for (const std::string& f : cmp_files) books.emplace_back(f, tables_of(load_codebook(f)));
      cmp_flags.write(compare(cmp_flags.config(), books));
    } else if (*exp) {
      const AnyCodebook cb = load_codebook(exp_file);
      emit(exp_out, exp_format == "csv" ? constellation_csv(cb) : codebook_to_json(cb));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
