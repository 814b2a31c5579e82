#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "byzsim/clients.hpp"
#include "byzsim/optimizers.hpp"

namespace byzsim {

// ---- configuration ----------------------------------------------------------

struct ProblemConfig {
  std::string type = "quadratic";  // "quadratic" | "synthetic_logistic" | "csv_logistic"

  // quadratic: eigenvalues linearly spaced on [1, kappa]; per-client gradient
  // offsets c_i with sum 0 and mean squared norm shift^2 (so G = shift, B = 0).
  int dim = 10;
  double kappa = 100.0;
  double shift = 0.0;

  // synthetic_logistic: per-client two-class Gaussian mixture whose class
  // mean is base + N(0, heterogeneity^2) per client; shared_data reuses one
  // dataset for every client (exactly homogeneous pool).
  int samples_per_client = 300;
  double heterogeneity = 0.0;
  double lambda = 1e-3;
  bool shared_data = false;

  // csv_logistic: labeled CSV split across clients, Dirichlet(beta) when
  // beta > 0, round-robin iid otherwise.
  std::string path;
  double beta = 0.0;
};

struct ExperimentConfig {
  ProblemConfig problem;
  int n = 10;
  int f = 0;
  std::string aggregator = "mean";
  std::string attack = "none";
  double attack_param = 1.0;
  std::string optimizer = "gd";  // "gd" | "fgm" | "pigs" | "audit"
  int K = 100;
  double eta = 0.0;              // gd step size; 0 -> 1/L
  std::string fgm_variant = "appendix";
  double pigs_eta = 0.0;         // required for pigs
  double pigs_c = -1.0;          // < 0 -> default 1e-3 / pigs_eta
  double pigs_E = 1e-6;
  int max_inner = 500;
  bool audit = true;
  int audit_points = 25;         // sample points certifying (G, B)
  bool record_timing = false;
  std::uint64_t seed = 0;
  std::string output;            // trace CSV path ("" = don't write)
  std::string holdout_csv;       // optional 0-1 accuracy evaluation set
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

// Applies one "key=value" override ("problem.kappa=100", "aggregator=gm");
// the value is parsed as JSON when possible and as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& key_eq_value);

// ---- experiment driver --------------------------------------------------------

struct BuiltProblem {
  ClientPool pool;
  LossPtr loss_ref;   // L_H as a loss oracle
  LossPtr proxy;      // PIGS proxy = honest client 0
  double L = 0.0;     // smoothness used for step sizes
  double mu = 0.0;
  Reference ref;
  HeterogeneityEstimate het;  // certified on the audit points
  std::vector<Vec> audit_points;
};

BuiltProblem build_problem(const ExperimentConfig& config);

struct ExperimentResult {
  RunTrace trace;
  Reference ref;
  double nu = 0.0;
  double G2 = 0.0, B2 = 0.0;
  double L = 0.0, mu = 0.0;
  double delta_hat = 0.0;        // estimated Hessian similarity of the proxy (pigs)
  bool eta_consistent = true;    // pigs: eta <= 1/(delta_hat + 8c/mu)
  double holdout_accuracy = std::numeric_limits<double>::quiet_NaN();
};

// Builds the pool, computes the reference minimizer, runs the optimizer, and
// (when configured) writes the trace CSV.  Fully deterministic per seed.
ExperimentResult run_experiment(const ExperimentConfig& config);

// ---- trace analysis -----------------------------------------------------------

// First round with loss_gap <= target, -1 when never reached.
int rounds_to_target(const RunTrace& trace, double target);

// Median loss gap over the last quarter of the trace.
double plateau(const RunTrace& trace);

struct CompareRow {
  std::string name;
  double plateau = 0.0;
  int rounds_to_target = -1;
};

// Rounds-to-target table; target <= 0 selects 1.5x the smallest plateau.
std::vector<CompareRow> compare_runs(const std::vector<const RunTrace*>& traces,
                                     const std::vector<std::string>& names,
                                     double target = 0.0);

// ---- emission -------------------------------------------------------------------

inline constexpr const char* kTraceHeader =
    "round,loss_gap,grad_norm,dist_to_opt,oracle_err_sq,lemma1_bound,inner_iters,wall_ms";

void emit_csv(const RunTrace& trace, const std::string& path);
RunTrace read_trace_csv(const std::string& path);

// Static self-contained SVG: log-scale loss gap vs round, one polyline per
// named trace.
void emit_plot(const std::vector<std::pair<std::string, RunTrace>>& traces,
               const std::string& path);

}  // namespace byzsim
