// mpad: multi-perspective one-class anomaly detection experiments.
//
// Subcommands: synth, pretrain, train, eval, baseline, hpo, repro.
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure,
// 5 internal error.

#include <CLI11.hpp>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mpad/baselines.hpp"
#include "mpad/checkpoint.hpp"
#include "mpad/config.hpp"
#include "mpad/dataset.hpp"
#include "mpad/fusion.hpp"
#include "mpad/hpo.hpp"
#include "mpad/metrics.hpp"

namespace fs = std::filesystem;
using namespace mpad;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out_dir;
  std::string scale = "desk";
};

io::ExperimentConfig resolve_config(const GlobalArgs& g, const std::string& preset_name = "") {
  io::ExperimentConfig cfg;
  if (!g.config_path.empty())
    cfg = io::load_config(g.config_path);
  else if (!preset_name.empty())
    cfg = io::preset(preset_name, g.scale);
  else
    throw std::invalid_argument("no --config given (and no preset name)");
  if (g.seed_set) cfg.seeds = {g.seed};
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  return cfg;
}

std::string fingerprint_split(const data::DatasetSplit& split) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  for (const auto& s : split.samples) {
    mix(static_cast<std::uint64_t>(s.label));
    for (const auto& v : s.views)
      for (double px : v.pixels) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(px));
        std::memcpy(&bits, &px, sizeof(bits));
        mix(bits);
      }
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

data::DatasetSplit apply_augmentation(const io::ExperimentConfig& cfg,
                                      const data::DatasetSplit& train, std::uint64_t seed) {
  if (cfg.augment_set == "none") return train;
  data::AugmentedSetId id;
  if (cfg.augment_set == "all")
    id = data::AugmentedSetId::all;
  else if (cfg.augment_set == "no_erase")
    id = data::AugmentedSetId::no_erase;
  else if (cfg.augment_set == "no_constituents")
    id = data::AugmentedSetId::no_constituents;
  else
    id = data::AugmentedSetId::no_geometry;
  return data::build_augmented_set(train, id, seed);
}

void write_run_manifest(const io::ExperimentConfig& cfg, const std::string& command,
                        double seconds) {
  fs::create_directories(cfg.out_dir);
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = io::config_hash(cfg);
  j["config"] = io::config_json(cfg);
  j["checkpoint_format_version"] = io::kCheckpointVersion;
  j["wall_time_s"] = seconds;
  std::ofstream out(fs::path(cfg.out_dir) / ("run_manifest_" + command + ".json"));
  out << j.dump(2) << "\n";
}

metrics::EvalReport run_experiment_once(const io::ExperimentConfig& cfg, std::uint64_t seed) {
  data::TrainTest ds = io::load_dataset(cfg.dataset, seed);
  const data::DatasetSplit train = apply_augmentation(cfg, ds.train, seed);
  Rng rng(seed);
  svdd::SvddModel model =
      fusion::train_pipeline(cfg.fusion, train, cfg.net, cfg.pretrain, cfg.svdd_hp, rng);
  metrics::ScoredSet set;
  set.scores = fusion::score_split(model, ds.test);
  for (const auto& s : ds.test.samples) set.labels.push_back(s.label);
  return metrics::evaluate(set, seed);
}

int cmd_synth(const GlobalArgs& g) {
  io::ExperimentConfig cfg = resolve_config(g, "table2-early");
  if (cfg.dataset.source != io::DataSource::synth_dices)
    throw std::invalid_argument("synth: dataset source must be synth_dices");
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(cfg.seeds.front());
  data::TrainTest ds = data::synth_dices(cfg.dataset.synth, rng);
  data::save_dices_split(ds.train, (fs::path(cfg.out_dir) / "train").string(), "manifest.csv");
  data::save_dices_split(ds.test, (fs::path(cfg.out_dir) / "test").string(), "manifest.csv");
  write_run_manifest(cfg, "synth",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  std::cout << "wrote " << ds.train.samples.size() << " train and " << ds.test.samples.size()
            << " test stacks under " << cfg.out_dir << "\n";
  return 0;
}

int cmd_pretrain(const GlobalArgs& g) {
  io::ExperimentConfig cfg = resolve_config(g);
  const std::uint64_t seed = cfg.seeds.front();
  const auto t0 = std::chrono::steady_clock::now();
  data::TrainTest ds = io::load_dataset(cfg.dataset, seed);
  const data::DatasetSplit train = apply_augmentation(cfg, ds.train, seed);
  Rng rng(seed);
  fusion::Pretrained pre = fusion::pretrain(cfg.fusion, train, cfg.net, cfg.pretrain, rng);

  svdd::SvddModel stub;  // encoder-only checkpoint; the sphere is not trained yet
  stub.encoder = nets::transfer_encoder(pre.encoder);
  stub.sphere.center.assign(static_cast<std::size_t>(stub.encoder.spec().latent_dim), 0.0);
  stub.sphere.radius = 0.0;
  stub.hp = cfg.svdd_hp;
  stub.fusion_tag = cfg.fusion;
  io::CheckpointMeta meta{seed, fingerprint_split(train), io::config_hash(cfg)};
  fs::create_directories(cfg.out_dir);
  io::save_checkpoint(stub, (fs::path(cfg.out_dir) / "pretrain.ckpt").string(), meta);
  write_run_manifest(cfg, "pretrain",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  std::cout << "pretrain loss " << pre.epoch_losses.front() << " -> " << pre.epoch_losses.back()
            << ", checkpoint at " << (fs::path(cfg.out_dir) / "pretrain.ckpt").string() << "\n";
  return 0;
}

int cmd_train(const GlobalArgs& g, const std::string& pretrain_ckpt) {
  io::ExperimentConfig cfg = resolve_config(g);
  const std::uint64_t seed = cfg.seeds.front();
  const auto t0 = std::chrono::steady_clock::now();
  io::LoadedCheckpoint pre = io::load_checkpoint(pretrain_ckpt);
  data::TrainTest ds = io::load_dataset(cfg.dataset, seed);
  const data::DatasetSplit train = apply_augmentation(cfg, ds.train, seed);
  Rng rng(seed);
  svdd::SvddModel model = svdd::train_svdd(std::move(pre.model.encoder),
                                           fusion::svdd_inputs(cfg.fusion, train), cfg.svdd_hp,
                                           rng, cfg.fusion);
  io::CheckpointMeta meta{seed, fingerprint_split(train), io::config_hash(cfg)};
  fs::create_directories(cfg.out_dir);
  io::save_checkpoint(model, (fs::path(cfg.out_dir) / "model.ckpt").string(), meta);
  write_run_manifest(cfg, "train",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  std::cout << "trained model: R = " << model.sphere.radius << ", checkpoint at "
            << (fs::path(cfg.out_dir) / "model.ckpt").string() << "\n";
  return 0;
}

int cmd_eval(const GlobalArgs& g, const std::string& ckpt_path) {
  io::ExperimentConfig cfg = resolve_config(g);
  const auto t0 = std::chrono::steady_clock::now();
  io::LoadedCheckpoint loaded = io::load_checkpoint(ckpt_path);
  if (loaded.model.encoder.spec().latent_dim != cfg.net.latent_dim ||
      loaded.model.encoder.spec().height != cfg.net.height ||
      loaded.model.encoder.spec().width != cfg.net.width)
    throw std::invalid_argument(
        "eval: checkpoint net spec disagrees with the requested evaluation shape (latent " +
        std::to_string(loaded.model.encoder.spec().latent_dim) + " vs " +
        std::to_string(cfg.net.latent_dim) + ")");
  data::TrainTest ds = io::load_dataset(cfg.dataset, cfg.seeds.front());
  metrics::ScoredSet set;
  set.scores = fusion::score_split(loaded.model, ds.test);
  for (const auto& s : ds.test.samples) set.labels.push_back(s.label);
  const metrics::EvalReport r = metrics::evaluate(set, loaded.meta.training_seed);

  fs::create_directories(cfg.out_dir);
  std::ofstream csv(fs::path(cfg.out_dir) / "eval.csv");
  csv << metrics::report_csv_header() << "\n"
      << metrics::report_csv_row(fusion::fusion_tag_str(loaded.model.fusion_tag), r) << "\n";
  write_run_manifest(cfg, "eval",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  std::cout << "ROC AUC " << r.roc_auc << ", macro P/R " << r.precision_macro << "/"
            << r.recall_macro << "\n";
  return 0;
}

int cmd_baseline(const GlobalArgs& g) {
  io::ExperimentConfig cfg = resolve_config(g);
  const std::uint64_t seed = cfg.seeds.front();
  const auto t0 = std::chrono::steady_clock::now();
  data::TrainTest ds = io::load_dataset(cfg.dataset, seed);

  // Stacked views flattened, then PCA to >= 95% variance.
  auto flatten = [](const data::DatasetSplit& split) {
    const auto& first = split.samples.front();
    const Eigen::Index d = static_cast<Eigen::Index>(
        first.views.size() * first.views[0].pixels.size());
    Eigen::MatrixXd X(static_cast<Eigen::Index>(split.samples.size()), d);
    for (std::size_t i = 0; i < split.samples.size(); ++i) {
      Eigen::Index col = 0;
      for (const auto& v : split.samples[i].views)
        for (double px : v.pixels) X(static_cast<Eigen::Index>(i), col++) = px;
    }
    return X;
  };
  const Eigen::MatrixXd train_raw = flatten(ds.train);
  const Eigen::MatrixXd test_raw = flatten(ds.test);
  const base::PcaModel pca = base::pca_fit(train_raw, 0.95);
  const Eigen::MatrixXd train = base::pca_transform(pca, train_raw);
  const Eigen::MatrixXd test = base::pca_transform(pca, test_raw);
  std::vector<int> labels;
  for (const auto& s : ds.test.samples) labels.push_back(s.label);

  fs::create_directories(cfg.out_dir);
  std::ofstream csv(fs::path(cfg.out_dir) / "baselines.csv");
  csv << "method,params,test_auc,best\n";
  for (auto [method, name] :
       {std::pair{base::BaselineMethod::ocsvm, "ocsvm"},
        std::pair{base::BaselineMethod::kde, "kde"},
        std::pair{base::BaselineMethod::iforest, "iforest"}}) {
    const base::GridSearchResult r =
        base::grid_search_baseline(method, train, test, labels, seed);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      csv << name << "," << r.points[i].params << ","
          << std::fixed << std::setprecision(6) << r.points[i].test_auc << ","
          << (i == r.best_index ? 1 : 0) << "\n";
    }
    std::cout << name << ": best AUC " << r.best_auc << " ("
              << r.points[r.best_index].params << "), PCA dims " << pca.components.rows()
              << "\n";
  }
  write_run_manifest(cfg, "baseline",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int cmd_hpo(const GlobalArgs& g, int min_budget, int max_budget, int eta, bool imbalance) {
  io::ExperimentConfig cfg = resolve_config(g);
  const std::uint64_t search_seed = cfg.seeds.front();
  const auto t0 = std::chrono::steady_clock::now();

  hpo::SearchSpace space;
  space.min_budget = min_budget;
  space.max_budget = max_budget;

  fs::create_directories(cfg.out_dir);
  std::ofstream log(fs::path(cfg.out_dir) / "trials.jsonl");

  auto run_with = [&](const hpo::Config& c, int budget, std::uint64_t seed) {
    io::ExperimentConfig trial_cfg = cfg;
    trial_cfg.svdd_hp.lr = c.lr;
    trial_cfg.svdd_hp.batch_size = c.batch_size;
    trial_cfg.svdd_hp.weight_decay = c.weight_decay;
    trial_cfg.svdd_hp.nu = c.nu;
    trial_cfg.svdd_hp.epochs = budget;
    trial_cfg.svdd_hp.warmup_epochs = std::min(cfg.svdd_hp.warmup_epochs, budget);
    trial_cfg.net.latent_dim = c.latent_dim;
    return run_experiment_once(trial_cfg, seed);
  };
  // Imbalanced test sets blend macro-f1 into the objective.
  auto objective = [&](const hpo::Config& c, int budget, std::uint64_t seed) {
    const metrics::EvalReport r = run_with(c, budget, seed);
    return imbalance ? 0.5 * (r.roc_auc + r.f1_macro) : r.roc_auc;
  };

  const hpo::Trial best =
      hpo::successive_halving(space, space.min_budget, space.max_budget, eta, objective,
                              search_seed, 0, [&](const hpo::Trial& t) {
                                log << hpo::trial_json(t) << "\n";
                                log.flush();
                              });

  const metrics::AggregateReport agg = hpo::finalize(
      best.config, cfg.seeds, [&](const hpo::Config& c, std::uint64_t seed) {
        return run_with(c, space.max_budget, seed);
      });

  std::ofstream bestj(fs::path(cfg.out_dir) / "best_config.json");
  bestj << nlohmann::json({{"lr", best.config.lr},
                           {"batch_size", best.config.batch_size},
                           {"weight_decay", best.config.weight_decay},
                           {"latent_dim", best.config.latent_dim},
                           {"nu", best.config.nu},
                           {"objective", best.objective},
                           {"budget", best.budget}})
               .dump(2)
        << "\n";
  std::ofstream table(fs::path(cfg.out_dir) / "hpo_report.txt");
  table << metrics::aggregate_table("hpo-winner", agg);
  write_run_manifest(cfg, "hpo",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  std::cout << "best objective " << best.objective << " at budget " << best.budget
            << "; finalized mean AUC " << agg.mean_roc_auc << "\n";
  return 0;
}

int cmd_repro(const GlobalArgs& g, const std::string& preset_name) {
  io::ExperimentConfig cfg = resolve_config(g, preset_name);
  const auto t0 = std::chrono::steady_clock::now();

  const metrics::AggregateReport agg = metrics::multi_seed_report(
      [&](std::uint64_t seed) { return run_experiment_once(cfg, seed); }, cfg.seeds);

  fs::create_directories(cfg.out_dir);
  std::ofstream csv(fs::path(cfg.out_dir) / "report.csv");
  csv << metrics::report_csv_header() << ",mean_roc_auc\n";
  csv << metrics::report_csv_row(preset_name.empty() ? "experiment" : preset_name, agg.best)
      << "," << std::fixed << std::setprecision(6) << agg.mean_roc_auc << "\n";
  std::ofstream table(fs::path(cfg.out_dir) / "report.txt");
  table << metrics::aggregate_table(preset_name.empty() ? "experiment" : preset_name, agg);

  // Re-train the best seed once more to persist its checkpoint.
  data::TrainTest ds = io::load_dataset(cfg.dataset, agg.best.seed);
  const data::DatasetSplit train = apply_augmentation(cfg, ds.train, agg.best.seed);
  Rng rng(agg.best.seed);
  svdd::SvddModel model =
      fusion::train_pipeline(cfg.fusion, train, cfg.net, cfg.pretrain, cfg.svdd_hp, rng);
  io::CheckpointMeta meta{agg.best.seed, fingerprint_split(train), io::config_hash(cfg)};
  io::save_checkpoint(model, (fs::path(cfg.out_dir) / "model.ckpt").string(), meta);

  write_run_manifest(cfg, "repro",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  std::cout << metrics::aggregate_table(preset_name, agg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-perspective one-class anomaly detection"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "JSON experiment config");
  auto* seed_opt = app.add_option("--seed", g.seed, "override the config seed list");
  app.add_option("--out", g.out_dir, "output directory override");
  app.add_option("--scale", g.scale, "preset scale: desk or paper")->check(CLI::IsMember({"desk", "paper"}));

  auto* synth = app.add_subcommand("synth", "generate a synthetic dices dataset (PNG + manifest)");
  auto* pretrain = app.add_subcommand("pretrain", "first stage: autoencoder pretraining");
  auto* train = app.add_subcommand("train", "second stage: SVDD training from a pretrain checkpoint");
  std::string pretrain_ckpt;
  train->add_option("--pretrain-ckpt", pretrain_ckpt, "pretrain checkpoint path")->required();
  auto* eval = app.add_subcommand("eval", "score a test set with a trained checkpoint");
  std::string model_ckpt;
  eval->add_option("--ckpt", model_ckpt, "model checkpoint path")->required();
  auto* baseline = app.add_subcommand("baseline", "PCA + OC-SVM/KDE/iForest grids");
  auto* hpo_cmd = app.add_subcommand("hpo", "successive-halving hyperparameter search");
  int min_budget = 5, max_budget = 45, eta = 3;
  bool imbalance = false;
  hpo_cmd->add_option("--min-budget", min_budget, "epochs at the first rung");
  hpo_cmd->add_option("--max-budget", max_budget, "epochs at the last rung");
  hpo_cmd->add_option("--eta", eta, "halving factor");
  hpo_cmd->add_flag("--imbalance", imbalance, "objective = (ROC AUC + macro-f1)/2");
  auto* repro = app.add_subcommand("repro", "run a named paper-table preset end to end");
  std::string preset_name;
  repro->add_option("preset", preset_name, "preset name")
      ->required()
      ->check(CLI::IsMember(io::preset_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    if (synth->parsed()) return cmd_synth(g);
    if (pretrain->parsed()) return cmd_pretrain(g);
    if (train->parsed()) return cmd_train(g, pretrain_ckpt);
    if (eval->parsed()) return cmd_eval(g, model_ckpt);
    if (baseline->parsed()) return cmd_baseline(g);
    if (hpo_cmd->parsed()) return cmd_hpo(g, min_budget, max_budget, eta, imbalance);
    if (repro->parsed()) return cmd_repro(g, preset_name);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    if (msg.find("diverged") != std::string::npos ||
        msg.find("non-finite") != std::string::npos) {
      std::cerr << "numerical failure: " << msg << "\n";
      return 4;
    }
    std::cerr << "data error: " << msg << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 5;
  }
}
