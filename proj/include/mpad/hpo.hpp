#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mpad/metrics.hpp"
#include "mpad/rng.hpp"

namespace mpad::hpo {

struct SearchSpace {
  double lr_min = 1e-5, lr_max = 1e-2;              // log-uniform
  int batch_min = 8, batch_max = 64;                // uniform int
  double weight_decay_min = 1e-9, weight_decay_max = 1e-5;  // log-uniform
  std::vector<int> latent_choices = {16, 32, 64};
  std::vector<double> nu_choices = {0.1, 0.2, 0.4};
  int min_budget = 10;  // epochs
  int max_budget = 90;
};

void validate_space(const SearchSpace& space);

struct Config {
  double lr = 1e-4;
  int batch_size = 32;
  double weight_decay = 1e-7;
  int latent_dim = 32;
  double nu = 0.4;
};

struct Trial {
  Config config;
  int budget = 0;
  double objective = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  double wall_time_s = 0.0;
};

Config sample_config(const SearchSpace& space, Rng& rng);

// objective(config, budget_epochs, seed) -> value to maximize.
using Objective = std::function<double(const Config&, int, std::uint64_t)>;
// Called once per completed (or failed) trial, in deterministic order.
using TrialSink = std::function<void(const Trial&)>;

// One Hyperband-style bracket: n_init random configs at min_budget, keep
// the top ceil(n/eta) per rung, budget multiplied by eta up to max_budget.
// Failed trials are logged and excluded. Returns the max-objective trial.
Trial successive_halving(const SearchSpace& space, int min_budget, int max_budget,
                         int eta, const Objective& objective, std::uint64_t search_seed,
                         int n_init = 0, const TrialSink& sink = nullptr);

// Geometric rung schedule min, min*eta, ... capped at max.
std::vector<int> rung_budgets(int min_budget, int max_budget, int eta);

// Re-evaluates the winner at full budget across seeds.
metrics::AggregateReport finalize(
    const Config& best, const std::vector<std::uint64_t>& seeds,
    const std::function<metrics::EvalReport(const Config&, std::uint64_t)>& run);

// JSON-lines record for the trial log.
std::string trial_json(const Trial& t);

}  // namespace mpad::hpo
