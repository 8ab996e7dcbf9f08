#include "mpad/hpo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mpad::hpo {

void validate_space(const SearchSpace& space) {
  if (space.lr_min <= 0 || space.lr_min > space.lr_max)
    throw std::invalid_argument("SearchSpace: bad lr range");
  if (space.batch_min < 1 || space.batch_min > space.batch_max)
    throw std::invalid_argument("SearchSpace: bad batch range");
  if (space.weight_decay_min < 0 || space.weight_decay_min > space.weight_decay_max)
    throw std::invalid_argument("SearchSpace: bad weight_decay range");
  if (space.latent_choices.empty() || space.nu_choices.empty())
    throw std::invalid_argument("SearchSpace: empty choice set");
  if (space.min_budget < 1 || space.min_budget > space.max_budget)
    throw std::invalid_argument("SearchSpace: bad budget range");
}

Config sample_config(const SearchSpace& space, Rng& rng) {
  validate_space(space);
  Config c;
  c.lr = (space.lr_min == space.lr_max) ? space.lr_min
                                        : rng.log_uniform(space.lr_min, space.lr_max);
  c.batch_size = static_cast<int>(rng.uniform_int(space.batch_min, space.batch_max));
  c.weight_decay = (space.weight_decay_min == space.weight_decay_max)
                       ? space.weight_decay_min
                       : rng.log_uniform(space.weight_decay_min, space.weight_decay_max);
  c.latent_dim = space.latent_choices[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(space.latent_choices.size()) - 1))];
  c.nu = space.nu_choices[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(space.nu_choices.size()) - 1))];
  return c;
}

std::vector<int> rung_budgets(int min_budget, int max_budget, int eta) {
  if (min_budget >= max_budget)
    throw std::invalid_argument("rung_budgets: need min_budget < max_budget");
  if (eta < 2) throw std::invalid_argument("rung_budgets: eta must be >= 2");
  std::vector<int> rungs;
  for (long b = min_budget; b < max_budget; b *= eta) rungs.push_back(static_cast<int>(b));
  rungs.push_back(max_budget);
  return rungs;
}

Trial successive_halving(const SearchSpace& space, int min_budget, int max_budget,
                         int eta, const Objective& objective, std::uint64_t search_seed,
                         int n_init, const TrialSink& sink) {
  validate_space(space);
  const std::vector<int> rungs = rung_budgets(min_budget, max_budget, eta);
  if (n_init <= 0)
    n_init = static_cast<int>(std::pow(eta, static_cast<double>(rungs.size() - 1)));

  Rng rng(search_seed);
  std::vector<Config> configs;
  configs.reserve(static_cast<std::size_t>(n_init));
  for (int i = 0; i < n_init; ++i) configs.push_back(sample_config(space, rng));

  std::optional<Trial> best;
  std::vector<std::size_t> alive(configs.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

  for (std::size_t r = 0; r < rungs.size(); ++r) {
    std::vector<std::pair<double, std::size_t>> scored;  // (-objective, index)
    for (std::size_t idx : alive) {
      Trial t;
      t.config = configs[idx];
      t.budget = rungs[r];
      t.seed = search_seed;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        t.objective = objective(t.config, t.budget, t.seed);
      } catch (const std::exception&) {
        t.failed = true;
        t.objective = -std::numeric_limits<double>::infinity();
      }
      t.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (sink) sink(t);
      if (!t.failed) {
        scored.emplace_back(-t.objective, idx);
        // >= so ties resolve to the deepest rung (the max-budget evaluation)
        if (!best || t.objective >= best->objective) best = t;
      }
    }
    if (scored.empty())
      throw std::runtime_error("successive_halving: every trial in rung " +
                               std::to_string(r) + " failed");
    // Deterministic survivor order: objective descending, index breaks ties.
    std::sort(scored.begin(), scored.end());
    const std::size_t keep = (r + 1 < rungs.size())
                                 ? (scored.size() + static_cast<std::size_t>(eta) - 1) /
                                       static_cast<std::size_t>(eta)
                                 : scored.size();
    alive.clear();
    for (std::size_t k = 0; k < keep; ++k) alive.push_back(scored[k].second);
  }
  return *best;
}

metrics::AggregateReport finalize(
    const Config& best, const std::vector<std::uint64_t>& seeds,
    const std::function<metrics::EvalReport(const Config&, std::uint64_t)>& run) {
  return metrics::multi_seed_report(
      [&](std::uint64_t seed) { return run(best, seed); }, seeds);
}

std::string trial_json(const Trial& t) {
  nlohmann::json j;
  j["config"] = {{"lr", t.config.lr},
                 {"batch_size", t.config.batch_size},
                 {"weight_decay", t.config.weight_decay},
                 {"latent_dim", t.config.latent_dim},
                 {"nu", t.config.nu}};
  j["budget"] = t.budget;
  j["objective"] = t.failed ? nlohmann::json() : nlohmann::json(t.objective);
  j["seed"] = t.seed;
  j["failed"] = t.failed;
  j["wall_time"] = t.wall_time_s;
  return j.dump();
}

}  // namespace mpad::hpo
