// pci-corr: experiment driver for masked pairwise feature correlation.
//
// Subcommands:
//   gen     generate a synthetic multi-modal dataset
//   fit     jointly train encoders, task head, and pairwise masks
//   mask    optimize masks for already-extracted feature CSV files
//   export  render mask CSV files as heatmaps (PGM or CSV)

#include "pcicorr/config.hpp"
#include "pcicorr/correlation.hpp"
#include "pcicorr/csvio.hpp"
#include "pcicorr/eval.hpp"
#include "pcicorr/features.hpp"
#include "pcicorr/mask.hpp"
#include "pcicorr/rng.hpp"
#include "pcicorr/synthgen.hpp"
#include "pcicorr/trainer.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr const char* kVersion = "pci-corr 0.1.0";

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> theta;
  std::optional<double> c;
  std::optional<double> alpha;
};

pcicorr::RunConfig effective_config(const std::string& config_path,
                                    const CliOverrides& cli) {
  pcicorr::RunConfig cfg = config_path.empty()
                               ? pcicorr::parse_run_config("", "<defaults>")
                               : pcicorr::load_run_config(config_path);
  if (cli.seed) {
    cfg.synth.seed = *cli.seed;
    cfg.train.seed = *cli.seed;
  }
  if (cli.theta) cfg.train.theta = *cli.theta;
  if (cli.c) cfg.c = *cli.c;
  if (cli.alpha) cfg.alpha = *cli.alpha;
  return cfg;
}

std::string timestamp_line() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return std::string("# generated_at: ") + buf + "\n";
}

int run_gen(const pcicorr::RunConfig& cfg) {
  const pcicorr::Dataset dataset = pcicorr::generate(cfg.synth);
  pcicorr::save_dataset(dataset, cfg.out_dir);
  for (int i = 0; i < cfg.synth.modalities; ++i) {
    const std::string path =
        cfg.out_dir + "/modality_" + std::to_string(i) + ".csv";
    std::cout << pcicorr::file_digest(path) << "  " << path << '\n';
  }
  for (const char* name : {"labels.csv", "ground_truth.txt"}) {
    const std::string path = cfg.out_dir + "/" + name;
    std::cout << pcicorr::file_digest(path) << "  " << path << '\n';
  }
  return 0;
}

int run_fit(const pcicorr::RunConfig& cfg) {
  const pcicorr::Dataset dataset = pcicorr::load_dataset(cfg.dataset_dir);
  const int m = dataset.truth.spec.feature_dim;
  const pcicorr::PgdConfig mask_cfg = cfg.pgd(m);
  const pcicorr::TrainedModel model =
      pcicorr::train(dataset, cfg.train, mask_cfg);
  pcicorr::save_model(model, cfg.out_dir, mask_cfg.tolerable_error);

  const pcicorr::RecoveryReport recovery =
      pcicorr::score_recovery(model.masks, dataset.truth, model.encoders);
  {
    std::ostringstream csv;
    csv << "pair,mass_on_planted,support_iou\n";
    for (const auto& pr : recovery.pairs)
      csv << pr.pair.first << '-' << pr.pair.second << ','
          << pcicorr::format_double(pr.mass_on_planted) << ','
          << pcicorr::format_double(pr.support_iou) << '\n';
    csv << "macro," << pcicorr::format_double(recovery.mass_on_planted) << ','
        << pcicorr::format_double(recovery.support_iou) << '\n';
    pcicorr::write_file(cfg.out_dir + "/recovery.csv", csv.str());
  }

  std::ostringstream report;
  report << "# " << kVersion << " run report\n" << timestamp_line() << '\n';
  report << "[config]\n" << cfg.echo() << '\n';
  report << "[seeds]\n";
  report << "train.master = " << cfg.train.seed << '\n';
  report << "derived.encoder = "
         << pcicorr::derive_seed(cfg.train.seed, "encoder") << '\n';
  report << "derived.shuffle = "
         << pcicorr::derive_seed(cfg.train.seed, "shuffle") << '\n';
  for (const auto& [key, mask] : model.masks.masks) {
    report << "derived.mask_init." << key.first << '_' << key.second << " = "
           << pcicorr::derive_seed(cfg.train.seed,
                                   "mask_init:" + std::to_string(key.first) +
                                       ":" + std::to_string(key.second))
           << '\n';
  }
  report << "\n[history]\n";
  report << "epoch correlation_loss task_loss total_loss\n";
  for (std::size_t e = 0; e < model.history.size(); ++e)
    report << e << ' '
           << pcicorr::format_double(model.history[e].correlation_loss) << ' '
           << pcicorr::format_double(model.history[e].task_loss) << ' '
           << pcicorr::format_double(model.history[e].total_loss) << '\n';
  report << "\n[masks]\n";
  for (const auto& [key, mask] : model.masks.masks)
    report << key.first << '-' << key.second
           << " sum = " << pcicorr::format_double(mask.weights.sum())
           << " budget = " << pcicorr::format_double(mask.sum_threshold)
           << '\n';
  report << "\n[recovery]\n";
  for (const auto& pr : recovery.pairs)
    report << pr.pair.first << '-' << pr.pair.second
           << " mass_on_planted = "
           << pcicorr::format_double(pr.mass_on_planted)
           << " support_iou = " << pcicorr::format_double(pr.support_iou)
           << '\n';
  report << "macro mass_on_planted = "
         << pcicorr::format_double(recovery.mass_on_planted)
         << " support_iou = " << pcicorr::format_double(recovery.support_iou)
         << '\n';
  report << "\n[task]\n";
  report << "train_accuracy = "
         << pcicorr::format_double(pcicorr::accuracy(
                model.encoders, model.head, dataset.observations,
                dataset.labels))
         << '\n';
  pcicorr::write_file(cfg.out_dir + "/report.txt", report.str());
  std::cout << "fit complete: " << cfg.out_dir << "/report.txt\n";
  return 0;
}

int run_mask(const pcicorr::RunConfig& cfg,
             const std::vector<std::string>& feature_paths) {
  if (feature_paths.size() < 2)
    throw std::invalid_argument("mask needs at least two feature CSV files");
  std::vector<pcicorr::FeatureBatch> batches;
  for (std::size_t i = 0; i < feature_paths.size(); ++i)
    batches.push_back(pcicorr::center(pcicorr::load_features_csv(
        feature_paths[i], static_cast<int>(i))));
  const int m = static_cast<int>(batches.front().dims());
  const pcicorr::PgdConfig mask_cfg = cfg.pgd(m);

  for (std::size_t i = 0; i < batches.size(); ++i) {
    for (std::size_t j = i + 1; j < batches.size(); ++j) {
      const auto key =
          pcicorr::make_pair_key(static_cast<int>(i), static_cast<int>(j));
      const std::uint64_t seed = pcicorr::derive_seed(
          cfg.train.seed, "mask_init:" + std::to_string(i) + ":" +
                              std::to_string(j));
      const pcicorr::PciMask init =
          pcicorr::random_mask(m, key, mask_cfg, seed);
      const pcicorr::OptimizeResult result =
          pcicorr::optimize_mask(batches[i], batches[j], init, mask_cfg);

      const std::string stem = cfg.out_dir + "/mask_" + std::to_string(i) +
                               "_" + std::to_string(j);
      pcicorr::save_mask_csv(result.mask, stem + ".csv",
                             mask_cfg.tolerable_error, seed);
      std::ostringstream trace;
      trace << "step,correlation_loss\n";
      for (std::size_t s = 0; s < result.loss_trace.size(); ++s)
        trace << s << ',' << pcicorr::format_double(result.loss_trace[s])
              << '\n';
      pcicorr::write_file(cfg.out_dir + "/trace_" + std::to_string(i) + "_" +
                              std::to_string(j) + ".csv",
                          trace.str());
      std::cout << "pair " << i << '-' << j << ": loss "
                << result.loss_trace.front() << " -> "
                << result.loss_trace.back() << " in " << result.iterations
                << " steps (" << (result.converged ? "converged" : "cap hit")
                << "), mask sum " << result.mask.weights.sum() << '\n';
    }
  }
  return 0;
}

int run_export(const std::vector<std::string>& mask_paths, bool figure2,
               const std::string& format) {
  if (mask_paths.empty())
    throw std::invalid_argument("export needs at least one mask CSV file");
  for (const std::string& path : mask_paths) {
    const pcicorr::PciMask mask = pcicorr::load_mask_csv(path);
    const std::string stem =
        std::filesystem::path(path).replace_extension("").string();
    if (format == "pgm") {
      pcicorr::save_mask_pgm(mask, stem + ".pgm", figure2);
      std::cout << stem + ".pgm" << '\n';
    } else {
      // Same grayscale convention as the PGM, one CSV row.
      const Eigen::Index width = figure2 ? 128 : mask.dims();
      std::ostringstream out;
      for (Eigen::Index i = 0; i < width; ++i) {
        if (i) out << ',';
        const double lambda = i < mask.dims() ? mask.weights(i) : 0.0;
        out << static_cast<int>(std::lround(255.0 * (1.0 - lambda)));
      }
      out << '\n';
      pcicorr::write_file(stem + ".heatmap.csv", out.str());
      std::cout << stem + ".heatmap.csv" << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masked pairwise feature correlation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides overrides;
  std::uint64_t seed_arg = 0;
  double theta_arg = 0, c_arg = 0, alpha_arg = 0;
  bool figure2 = false;
  std::string format = "pgm";

  app.add_option("--config", config_path, "INI config file");
  auto* seed_opt = app.add_option("--seed", seed_arg, "override every seed");
  auto* theta_opt =
      app.add_option("--theta", theta_arg, "correlation weight in the loss");
  auto* c_opt = app.add_option("--c", c_arg, "mask budget");
  auto* alpha_opt = app.add_option("--alpha", alpha_arg, "mask PGD step size");
  app.add_flag("--figure2", figure2,
               "export heatmaps at fixed width 128 (first dimensions, "
               "white-padded)");
  app.add_option("--format", format, "heatmap format")
      ->check(CLI::IsMember({"pgm", "csv"}));

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  auto* fit = app.add_subcommand("fit", "train encoders, head, and masks");
  auto* mask_cmd =
      app.add_subcommand("mask", "optimize masks for feature CSV files");
  std::vector<std::string> feature_paths;
  mask_cmd->add_option("features", feature_paths,
                       "two or more feature CSV files (one per modality)");
  auto* export_cmd =
      app.add_subcommand("export", "render mask heatmaps (PGM or CSV)");
  std::vector<std::string> mask_paths;
  export_cmd->add_option("masks", mask_paths, "mask CSV files");

  // The shared options above belong to the top-level app; let every
  // subcommand hand unmatched flags back up so `pci-corr gen --config x`
  // parses the same as `pci-corr --config x gen`.
  for (CLI::App* sub : {gen, fit, mask_cmd, export_cmd}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (*seed_opt) overrides.seed = seed_arg;
  if (*theta_opt) overrides.theta = theta_arg;
  if (*c_opt) overrides.c = c_arg;
  if (*alpha_opt) overrides.alpha = alpha_arg;

  try {
    const pcicorr::RunConfig cfg = effective_config(config_path, overrides);
    if (gen->parsed()) return run_gen(cfg);
    if (fit->parsed()) return run_fit(cfg);
    if (mask_cmd->parsed()) return run_mask(cfg, feature_paths);
    return run_export(mask_paths, figure2, format);
  } catch (const pcicorr::BracketError& err) {
    std::cerr << "error (retryable): " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}
