// Minimizes a sphere hidden in 8 of 40 dimensions with CMA-ES and CMA-ES-LED
// and prints how many evaluations each needed and what n_eff_hat ended at.

#include <cstdio>

#include "ledcma/harness.hpp"

int main() {
  using namespace ledcma;

  for (const Variant algo : {Variant::Cmaes, Variant::Led}) {
    ExperimentConfig cfg;
    cfg.algo = algo;
    cfg.fn = 1;
    cfg.dim = 40;
    cfg.eff_dim = 8;
    cfg.seed = 7;

    const TrialRecord rec = run_trial(cfg, 0, trial_seed(cfg, 0));
    std::printf("%-6s success=%d evaluations=%ld best_f=%.3e final n_eff_hat=%.2f\n",
                std::string(variant_name(algo)).c_str(), rec.success ? 1 : 0, rec.evaluations, rec.best_f,
                rec.rows.empty() ? 0.0 : rec.rows.back().neff_hat);
  }
  return 0;
}
