// Command-line front end: run | norms | analyze | oracle-check.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "lrmip/analysis.hpp"
#include "lrmip/errors.hpp"
#include "lrmip/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

void write_report(const nlohmann::json& report, const std::string& path) {
  if (path.empty()) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lrmip::ConfigError("cannot write " + path);
  out << report.dump(2) << "\n";
}

// Built-in oracle configuration: six sites at half filling, long enough for
// roughly sixty jumps per trajectory.
lrmip::ExperimentConfig default_oracle_config() {
  lrmip::ExperimentConfig c;
  c.sizes = {6};
  c.alphas = {1.5};
  c.gammas = {1.0};
  c.t_burn = 0.0;
  c.t_sample = 20.0;
  c.dt_sample = 0.5;
  c.seed = 1;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monitored long-range free fermions: trajectories, scaling fits and norm bounds"};
  app.set_version_flag("--version", lrmip::version());
  app.require_subcommand(1);

  std::string config_path;
  int workers = -1;
  std::string out_dir;
  bool resume = false;
  long stop_after = -1;

  auto* run = app.add_subcommand("run", "Sweep (L, alpha, gamma) and write results");
  run->add_option("--config", config_path, "Configuration file (YAML)")->required();
  run->add_option("--workers", workers, "Worker threads (0: all cores)");
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_flag("--resume", resume, "Continue from checkpoint.jsonl in the output directory");
  run->add_option("--stop-after", stop_after)->group("");

  std::vector<double> norm_alphas;
  std::vector<int> norm_sizes;
  auto* norms = app.add_subcommand("norms", "Boundary-coupling norms and their scaling with L");
  norms->add_option("--config", config_path, "Configuration file with norm_alpha and norm_L");
  norms->add_option("--alpha", norm_alphas, "Decay exponents");
  norms->add_option("--L", norm_sizes, "System sizes (increasing)");
  norms->add_option("--out", out_dir, "Output directory");

  std::vector<std::string> inputs;
  std::string mode_name;
  std::string report_path;
  lrmip::AnalysisOptions analysis;
  std::string plot_dir;
  auto* analyze = app.add_subcommand("analyze", "Crossing, collapse or profile fits of results");
  analyze->add_option("--input", inputs, "results.csv files")->required();
  analyze->add_option("--mode", mode_name, "crossing | bkt | powerlaw | cft")->required();
  analyze->add_option("--config", config_path, "Configuration supplying collapse and window settings");
  analyze->add_option("--observable", analysis.observable, "Observable column to analyse");
  analyze->add_option("--resamples", analysis.bootstrap_resamples, "Bootstrap resamples");
  analyze->add_option("--seed", analysis.seed, "Bootstrap seed");
  analyze->add_option("--plot-dir", plot_dir, "Directory for collapse coordinates");
  analyze->add_option("--report", report_path, "Write the JSON report here instead of stdout");

  int oracle_traj = 3;
  bool inject_fault = false;
  auto* oracle = app.add_subcommand("oracle-check", "Compare Gaussian trajectories with dense replays");
  oracle->add_option("--config", config_path, "Configuration (first L, alpha, gamma are used)");
  oracle->add_option("--trajectories", oracle_traj, "Trajectories to replay");
  oracle->add_option("--report", report_path, "Write the JSON report here instead of stdout");
  oracle->add_flag("--inject-fault", inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) {
      lrmip::ExperimentConfig config = lrmip::ExperimentConfig::from_file(config_path);
      lrmip::RunOptions options;
      options.workers = workers;
      if (!out_dir.empty()) options.out_dir = out_dir;
      options.resume = resume;
      options.stop_after = stop_after;
      const lrmip::ResultSet rs = lrmip::run_experiment(config, options);
      if (!rs.complete) {
        std::cerr << "run interrupted; resume with --resume\n";
        return kExitPartial;
      }
      int failed = 0;
      for (const auto& cell : rs.cells) {
        if (!cell.ok) {
          ++failed;
          std::cerr << "cell " << cell.key.label() << " failed: " << cell.error << "\n";
        }
      }
      std::cout << rs.cells.size() - static_cast<std::size_t>(failed) << "/" << rs.cells.size()
                << " cells completed, config hash " << rs.config_hash << "\n";
      return failed ? kExitPartial : kExitOk;
    }
    if (*norms) {
      std::string dir = out_dir;
      if (!config_path.empty()) {
        const lrmip::ExperimentConfig config = lrmip::ExperimentConfig::from_file(config_path);
        if (norm_alphas.empty()) norm_alphas = config.norm_alphas;
        if (norm_sizes.empty()) norm_sizes = config.norm_sizes;
        if (dir.empty()) dir = config.output_dir;
      }
      if (dir.empty()) dir = "out";
      const auto series = lrmip::run_norms(norm_alphas, norm_sizes, dir);
      for (const auto& s : series) {
        std::cout << "alpha=" << lrmip::format_double(s.alpha) << " "
                  << lrmip::to_string(s.classification)
                  << " ratio=" << lrmip::format_double(s.growth_ratio)
                  << " mu=" << lrmip::format_double(s.power.mu) << "\n";
      }
      return kExitOk;
    }
    if (*analyze) {
      if (!config_path.empty()) {
        const lrmip::ExperimentConfig config = lrmip::ExperimentConfig::from_file(config_path);
        analysis.collapse = config.collapse;
        analysis.fit_lo = config.fit_lo;
        analysis.fit_hi = config.fit_hi;
      }
      if (!plot_dir.empty()) analysis.plot_dir = plot_dir;
      std::vector<lrmip::ResultRow> rows;
      for (const auto& path : inputs) {
        auto more = lrmip::read_results_csv(path);
        rows.insert(rows.end(), more.begin(), more.end());
      }
      const auto mode = lrmip::parse_analysis_mode(mode_name);
      write_report(lrmip::analyze(rows, mode, analysis), report_path);
      return kExitOk;
    }
    if (*oracle) {
      lrmip::ExperimentConfig config =
          config_path.empty() ? default_oracle_config() : lrmip::ExperimentConfig::from_file(config_path);
      if (config.sizes.empty() || config.alphas.empty() || config.gammas.empty()) {
        throw lrmip::ConfigError("oracle check needs L, alpha and gamma");
      }
      if (!config.seed) throw lrmip::ConfigError("seed is mandatory");
      const lrmip::TrajectoryConfig tc =
          lrmip::cell_config(config, {config.sizes[0], config.alphas[0], config.gammas[0]});
      lrmip::OracleCheckOptions options;
      options.n_traj = oracle_traj;
      options.inject_fault = inject_fault;
      const auto report = lrmip::run_oracle_check(tc, options);
      write_report(report.to_json(), report_path);
      return report.passed ? kExitOk : kExitCheckFailed;
    }
  } catch (const lrmip::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitOk;
}
