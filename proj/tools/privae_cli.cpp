// privae: train VAEs and measure their information plane, run PRI sweeps,
// evaluate estimators on CSV data, and compare runs.

#include "privae/config.hpp"
#include "privae/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

struct RunFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
  cmd->add_option("--seed", f.seed, "random seed (overrides the config)");
  cmd->add_flag("--force", f.force, "train PRI-VAE even when beta <= alpha");
}

privae::RunConfig resolve(const RunFlags& f) {
  privae::RunConfig cfg = f.config.empty() ? privae::RunConfig{} : privae::RunConfig::load(f.config);
  if (!f.out.empty()) cfg.out = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.force) cfg.force = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information-plane analysis of VAE objectives with matrix-based Renyi estimators"};
  app.require_subcommand(1);

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "train a VAE on the factor grid");
  add_run_flags(train, train_flags);

  RunFlags pri_flags;
  std::string gammas;
  auto* pri = app.add_subcommand("pri", "Principle of Relevant Information gamma sweep");
  add_run_flags(pri, pri_flags);
  pri->add_option("--gammas", gammas, "comma separated gamma list (overrides the config)");

  privae::EstimateOptions est;
  std::vector<std::string> est_files;
  std::string est_out;
  std::string kernel = "median";
  double kernel_multiple = 1.0;
  auto* estimate = app.add_subcommand("estimate", "entropy, MI or TC of CSV data");
  estimate->add_option("files", est_files, "CSV files (two for mi)")->required();
  estimate->add_option("--quantity", est.quantity, "entropy, mi or tc")
      ->check(CLI::IsMember({"entropy", "mi", "tc"}));
  estimate->add_option("--estimator", est.estimator, "renyi, knn or kde")
      ->check(CLI::IsMember({"renyi", "knn", "kde"}));
  estimate->add_option("--alpha", est.alpha, "Renyi order");
  estimate->add_option("--kernel", kernel, "median, silverman or a fixed width");
  estimate->add_option("--kernel-multiple", kernel_multiple, "multiple of the median distance");
  estimate->add_option("--k", est.k, "neighbor count for knn");
  estimate->add_option("--batch", est.batch, "Renyi batch size; 0 uses every row at once");
  estimate->add_option("--out", est_out, "also write the result as CSV");

  std::vector<std::string> compare_runs;
  std::string compare_out = "compare";
  auto* compare = app.add_subcommand("compare", "merge the summaries of several runs");
  compare->add_option("runs", compare_runs, "run directories")->required();
  compare->add_option("--out", compare_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return privae::cmd_train(resolve(train_flags), std::cout);
    if (*pri) {
      privae::RunConfig cfg = resolve(pri_flags);
      if (!gammas.empty()) cfg.gammas = privae::parse_double_list(gammas);
      return privae::cmd_pri(cfg, std::cout);
    }
    if (*estimate) {
      for (const auto& f : est_files) est.files.emplace_back(f);
      est.out = est_out;
      est.kernel = privae::parse_kernel(kernel, kernel_multiple);
      return privae::cmd_estimate(est, std::cout, std::cerr);
    }
    if (*compare) {
      std::vector<std::filesystem::path> dirs(compare_runs.begin(), compare_runs.end());
      return privae::cmd_compare(dirs, compare_out, std::cout, std::cerr);
    }
  } catch (const privae::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
