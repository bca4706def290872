// led-cmaes: run CMA-ES / CMA-ES-LED experiments on the LED benchmark suite and
// write trace.csv, summary.csv, segments.csv (and optionally led_trace.csv).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ledcma/harness.hpp"

namespace {

void report(const ledcma::ExperimentConfig& cfg, const ledcma::Summary& s) {
  std::printf("%s/%s/%s f%d N=%d N_eff=%d: %d/%d successful", std::string(ledcma::variant_name(s.algo)).c_str(),
              std::string(ledcma::step_size_name(s.stepsize)).c_str(), s.ipop ? "ipop" : "none", s.fn, s.dim,
              s.eff_dim, s.successes, s.trials);
  if (s.median_evals) {
    std::printf(", median evals %.6g (IQR %.6g..%.6g), evals/success-rate %.6g", *s.median_evals, *s.q1_evals,
                *s.q3_evals, *s.evals_per_success_rate);
  }
  std::printf("\nresults in %s/\n", cfg.out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMA-ES with low-effective-dimensionality adaptation"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run independent trials of one configuration");
  std::string config_file;
  run->add_option("--config", config_file, "key=value file; flags given on the command line take precedence")
      ->check(CLI::ExistingFile);

  // Every value is routed through apply_setting so the command line and the
  // config file share one parser.
  std::vector<std::pair<std::string, CLI::Option*>> settings;
  std::vector<std::pair<std::string, CLI::Option*>> flags;
  auto option = [&](const std::string& key, const std::string& help) {
    settings.emplace_back(key, run->add_option("--" + key, help));
  };
  auto flag = [&](const std::string& key, const std::string& help) {
    flags.emplace_back(key, run->add_flag("--" + key, help));
  };
  option("algo", "cmaes | led | hp-only | norm-only (default cmaes)");
  option("stepsize", "csa | tpa (default csa)");
  option("restart", "none | ipop (default none)");
  option("fn", "benchmark function 1..9 (default 1)");
  option("dim", "total dimension N (default 8)");
  option("eff-dim", "effective dimension N_eff (default 8)");
  option("trials", "number of independent trials (default 20)");
  option("seed", "master seed (default 1)");
  option("lambda", "initial population size; 0 selects 4 + floor(3 ln N)");
  option("budget-mult", "evaluation budget per dimension (default 1e5)");
  option("out", "output directory (default out)");
  option("jobs", "worker threads (default 1)");
  flag("no-rotation", "use the identity instead of a random rotation");
  flag("trace-led", "write per-coordinate v_snr, v and alignment to led_trace.csv");
  flag("maxiter-as-evals", "read the MaxIter bound as an evaluation count");

  CLI11_PARSE(app, argc, argv);

  try {
    ledcma::ExperimentConfig cfg;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw ledcma::ConfigError("cannot open config file '" + config_file + "'");
      ledcma::apply_config_text(cfg, in);
    }
    for (const auto& [key, opt] : settings) {
      if (opt->count() > 0) ledcma::apply_setting(cfg, key, opt->as<std::string>());
    }
    for (const auto& [key, opt] : flags) {
      if (opt->count() > 0) ledcma::apply_setting(cfg, key, "true");
    }
    cfg.validate();

    const ledcma::ExperimentResult result = ledcma::run_experiment(cfg);
    report(cfg, result.summary);
    return 0;
  } catch (const ledcma::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
