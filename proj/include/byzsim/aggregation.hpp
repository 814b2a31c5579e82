#pragma once

#include <string>
#include <vector>

#include "byzsim/loss.hpp"

namespace byzsim {

enum class AggRule { Mean, CWTM, CWM, GM, Krum };
enum class Mixing { NNM, FRG_GTS };

// A base rule plus an ordered chain of mixings applied to the client vectors
// before the rule (left to right).
struct AggregatorSpec {
  AggRule rule = AggRule::Mean;
  std::vector<Mixing> mixings;
  int f = 0;
  double gm_tol = 1e-8;
  int gm_max_iter = 1000;
  int krum_neighbors = -1;  // -1: default n - f - 1
  double frg_rho = 4.0;     // robustness factor declared for the GTS summand
};

// ---- base rules -----------------------------------------------------------

Vec mean(const std::vector<Vec>& vectors);

// Per coordinate: drop the f largest and f smallest values, average the rest.
Vec cwtm(const std::vector<Vec>& vectors, int f);

// Coordinate-wise median (mean of the two middle values for even n).
Vec cwm(const std::vector<Vec>& vectors);

// Weiszfeld iteration with 1e-12 distance smoothing, started at the mean.
// Converged when the stationarity residual |sum_i (v_i - m)/max(|v_i - m|,
// eps)| drops to tol * n; otherwise the best (lowest objective) iterate is
// returned with converged = false.
struct GmResult {
  Vec point;
  int iters = 0;
  bool converged = false;
};
GmResult geometric_median(const std::vector<Vec>& vectors, double tol = 1e-8,
                          int max_iter = 1000);

// Returns the input minimizing the summed squared distances to its
// `neighbors` nearest neighbors (default n - f - 1, excluding itself);
// ties broken by lowest index.  Requires n >= f + 3.
Vec krum(const std::vector<Vec>& vectors, int f, int neighbors = -1);

// ---- mixings ----------------------------------------------------------------

// Nearest-neighbor mixing: output i is the average of the n - f inputs
// closest to v_i (itself included; distance ties by index).
std::vector<Vec> nnm(const std::vector<Vec>& vectors, int f);

// Geometrically trimmed sum: mean of the n - f smallest-norm vectors
// (norm ties by index).
Vec gts(const std::vector<Vec>& diffs, int f);

// One robust-gossip step on the fully connected uniform-weight graph with
// unit step size: y_i = x_i - gts((x_i - x_j)_j, f).
std::vector<Vec> frg_mix(const std::vector<Vec>& vectors, int f);

// ---- spec-driven interface --------------------------------------------------

// Applies the mixing chain left to right, then the base rule.
Vec aggregate(const AggregatorSpec& spec, std::vector<Vec> vectors);

// Closed-form robustness coefficient: base value per rule
//   CWTM: (6f/(n-2f)) (1 + 6f/(n-2f))     Krum: 6 (1 + 6f/(n-2f))
//   GM, CWM: 4 (1 + f/(n-2f))^2           Mean: 0 when f = 0, else +infinity
// then each mixing composes as nu <- delta (1 + nu) with
//   NNM: delta = 8f/(n-f)   (requires f/n < 1/9)
//   F-RG(GTS): delta = 2*rho*f/(n-f)  (requires f/n < 1/(2 rho + 1)).
// Since a mixing chain wraps the rule left to right, composition folds from
// the rule outward (rightmost mixing first).
double robustness_coefficient(const AggregatorSpec& spec, int n);

// Lower bound on any rule's coefficient: f/(n - 2f).
double robustness_lower_bound(int n, int f);

// Parses "cwtm", "nnm+cwtm", "frg(gts)+gm", ...: left-to-right mixing chain,
// final token the base rule.
AggregatorSpec parse_aggregator(const std::string& text, int f);
std::string aggregator_string(const AggregatorSpec& spec);

// Exhaustive check of the robustness definition: enumerates every subset S of
// size n - f (n <= 12), compares |F(x) - mean_S|^2 against
// nu * (1/|S|) sum_{i in S} |x_i - mean_S|^2.  Zero-variance subsets
// contribute ratio 0 when the error is zero and set `infinite` otherwise.
struct RobustnessCheck {
  double worst_ratio = 0.0;
  bool holds = false;
  bool infinite = false;
  double nu = 0.0;
};
RobustnessCheck verify_robustness(const AggregatorSpec& spec,
                                  const std::vector<Vec>& vectors, int f);

// Seeded random trials of verify_robustness: each trial draws n vectors with
// mixed per-vector scales (and occasionally one far outlier) and checks every
// honest subset.  Returns the worst ratio seen; holds only if every trial held.
RobustnessCheck verify_robustness_trials(const AggregatorSpec& spec, int n, int trials,
                                         int dim, std::uint64_t seed);

}  // namespace byzsim
