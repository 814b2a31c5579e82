#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "byzsim/harness.hpp"

namespace {

void print_result(const byzsim::ExperimentConfig& config, const byzsim::ExperimentResult& result) {
  const auto& trace = result.trace;
  std::printf("problem      %s (dim %d)\n", config.problem.type.c_str(),
              static_cast<int>(result.ref.x_star.size()));
  std::printf("clients      n=%d f=%d aggregator=%s attack=%s\n", config.n, config.f,
              config.aggregator.c_str(), config.attack.c_str());
  std::printf("optimizer    %s (K=%d)\n", config.optimizer.c_str(), config.K);
  std::printf("constants    L=%.6g mu=%.6g nu=%.6g G^2=%.6g B^2=%.6g\n", result.L, result.mu,
              result.nu, result.G2, result.B2);
  if (config.optimizer == "pigs")
    std::printf("similarity   delta_hat=%.6g eta=%.6g (consistent: %s)\n", result.delta_hat,
                config.pigs_eta, result.eta_consistent ? "yes" : "no");
  if (!trace.rows.empty()) {
    const auto& last = trace.rows.back();
    std::printf("rounds       %d\n", last.round);
    std::printf("final        loss_gap=%.6g grad_norm=%.6g dist_to_opt=%.6g\n", last.loss_gap,
                last.grad_norm, last.dist_to_opt);
    std::printf("plateau      %.6g\n", byzsim::plateau(trace));
  }
  if (trace.diverged) std::printf("diverged     at round %d\n", trace.diverged_round);
  if (trace.inner_failed)
    std::printf("inner solver failed at round %d\n", trace.inner_failed_round);
  if (std::isfinite(result.holdout_accuracy))
    std::printf("holdout      accuracy=%.4f\n", result.holdout_accuracy);
  if (!config.output.empty()) std::printf("trace        %s\n", config.output.c_str());
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& output_override) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config file: " + config_path);
  nlohmann::json j = nlohmann::json::parse(in);
  for (const std::string& kv : overrides) byzsim::apply_override(j, kv);
  if (!output_override.empty()) j["output"] = output_override;
  const byzsim::ExperimentConfig config = byzsim::config_from_json(j);
  const byzsim::ExperimentResult result = byzsim::run_experiment(config);
  print_result(config, result);
  return 0;
}

int cmd_sweep(const std::string& dir) {
  std::vector<std::filesystem::path> configs;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::fprintf(stderr, "sweep: no .json configs in %s\n", dir.c_str());
    return 1;
  }
  int failures = 0;
  for (const auto& path : configs) {
    try {
      const byzsim::ExperimentConfig config = byzsim::load_config(path.string());
      const byzsim::ExperimentResult result = byzsim::run_experiment(config);
      const auto& last = result.trace.rows.back();
      std::printf("%-32s rounds=%-7d loss_gap=%-12.6g plateau=%-12.6g%s%s\n",
                  path.filename().string().c_str(), last.round, last.loss_gap,
                  byzsim::plateau(result.trace), result.trace.diverged ? " DIVERGED" : "",
                  result.trace.inner_failed ? " INNER-FAILED" : "");
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s: error: %s\n", path.filename().string().c_str(), e.what());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_bounds(double G, double B, double mu, int f, int n) {
  const byzsim::RobustnessBounds bounds = byzsim::byzantine_bounds(G, B, mu, f, n);
  std::printf("breakdown_ok   %s (needs f (B^2 + 2) <= n)\n", bounds.breakdown_ok ? "yes" : "no");
  std::printf("value_bound    %.17g\n", bounds.value_bound);
  std::printf("gradnorm_bound %.17g\n", bounds.gradnorm_bound);
  return 0;
}

int cmd_agg_verify(const std::string& rule, int n, int f, int trials, int dim,
                   std::uint64_t seed) {
  const byzsim::AggregatorSpec spec = byzsim::parse_aggregator(rule, f);
  const byzsim::RobustnessCheck check =
      byzsim::verify_robustness_trials(spec, n, trials, dim, seed);
  std::printf("rule           %s (n=%d, f=%d, dim=%d, trials=%d)\n", rule.c_str(), n, f, dim,
              trials);
  std::printf("nu             %.17g\n", check.nu);
  std::printf("worst ratio    %.17g\n", check.worst_ratio);
  if (check.infinite) std::printf("zero-variance subset with nonzero error observed\n");
  std::printf("verdict        %s\n", check.holds ? "OK (worst ratio <= nu)" : "VIOLATION");
  return check.holds ? 0 : 2;
}

int cmd_plot(const std::vector<std::string>& csv_paths, const std::string& out_path) {
  std::vector<std::pair<std::string, byzsim::RunTrace>> traces;
  traces.reserve(csv_paths.size());
  for (const std::string& path : csv_paths)
    traces.emplace_back(std::filesystem::path(path).stem().string(),
                        byzsim::read_trace_csv(path));
  byzsim::emit_plot(traces, out_path);
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robust distributed first-order optimization simulator"};
  app.require_subcommand(1);

  std::string run_config;
  std::vector<std::string> run_overrides;
  std::string run_output;
  CLI::App* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("config", run_config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--set", run_overrides, "override a config key, e.g. --set problem.kappa=100");
  run->add_option("-o,--output", run_output, "trace CSV path (overrides the config)");

  std::string sweep_dir;
  CLI::App* sweep = app.add_subcommand("sweep", "Run every *.json config in a directory");
  sweep->add_option("dir", sweep_dir, "config directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  double G = 0.0, B = 0.0, mu = 0.0;
  int bounds_f = 0, bounds_n = 0;
  CLI::App* bounds =
      app.add_subcommand("bounds", "Print breakdown condition and stationary error bounds");
  bounds->add_option("--G", G, "gradient heterogeneity G")->required();
  bounds->add_option("--B", B, "relative heterogeneity B")->required();
  bounds->add_option("--mu", mu, "strong convexity mu")->required();
  bounds->add_option("--f", bounds_f, "Byzantine count")->required();
  bounds->add_option("--n", bounds_n, "total clients")->required();

  std::string verify_rule;
  int verify_n = 0, verify_f = 0, verify_trials = 200, verify_dim = 5;
  std::uint64_t verify_seed = 1234;
  CLI::App* verify = app.add_subcommand(
      "agg-verify", "Check the robustness inequality on random inputs, every honest subset");
  verify->add_option("--rule", verify_rule, "aggregator, e.g. cwtm or nnm+cwtm")->required();
  verify->add_option("--n", verify_n, "total clients (<= 12)")->required();
  verify->add_option("--f", verify_f, "Byzantine count")->required();
  verify->add_option("--trials", verify_trials, "random trials (default 200)");
  verify->add_option("--dim", verify_dim, "vector dimension (default 5)");
  verify->add_option("--seed", verify_seed, "RNG seed (default 1234)");

  std::vector<std::string> plot_csvs;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("plot", "Render trace CSVs as a log-scale SVG chart");
  plot->add_option("csv", plot_csvs, "trace CSV files")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("-o,--output", plot_out, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config, run_overrides, run_output);
    if (sweep->parsed()) return cmd_sweep(sweep_dir);
    if (bounds->parsed()) return cmd_bounds(G, B, mu, bounds_f, bounds_n);
    if (verify->parsed())
      return cmd_agg_verify(verify_rule, verify_n, verify_f, verify_trials, verify_dim,
                            verify_seed);
    if (plot->parsed()) return cmd_plot(plot_csvs, plot_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
