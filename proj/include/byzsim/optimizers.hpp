#pragma once

#include <optional>

#include "byzsim/oracle.hpp"
#include "byzsim/schedule.hpp"

namespace byzsim {

// Certified reference solution the trace metrics are measured against.
struct Reference {
  Vec x_star;
  double f_star = 0.0;
};

struct TraceRow {
  int round = 0;
  double loss_gap = 0.0;
  double grad_norm = 0.0;
  double dist_to_opt = 0.0;
  double oracle_err_sq = 0.0;
  double lemma1_bound = 0.0;
  int inner_iters = 0;  // 0 for non-PIGS optimizers
  double wall_ms = 0.0;
};

// Row 0 holds the initial point; row r holds the reported iterate after r
// oracle rounds together with round r's oracle audit.  gd and pigs report
// x_r; fgm reports y_{r-1} (the iterate its guarantee speaks about).
struct RunTrace {
  std::vector<TraceRow> rows;
  Vec final_x;                          // last reported iterate
  std::optional<Vec> weighted_average;  // PIGS beta-weighted average
  bool diverged = false;
  int diverged_round = -1;
  bool inner_failed = false;
  int inner_failed_round = -1;
  double max_eq6_violation = 0.0;       // over accepted prox steps; <= 0 when clean
};

struct TraceOptions {
  bool record_timing = false;  // off: wall_ms written as 0 so reruns are byte-identical
};

// Metrics of one reported iterate measured against the reference.
TraceRow trace_row(int round, const Vec& x, const LossOracle& loss_ref, const Reference& ref,
                   double err_sq, double bound, int inner_iters, double wall_ms);

// Loss gap above which a run is declared divergent and aborted.
inline constexpr double kDivergenceGuard = 1e12;

// x_{k+1} = x_k - eta * g_tilde(x_k).
RunTrace gd(InexactOracle& oracle, const LossOracle& loss_ref, const Reference& ref,
            const Vec& x0, double eta, int K, const TraceOptions& topt = {});

// Two-sequence fast gradient method:
//   y_k     = x_k - (1/2L) g_tilde(x_k)
//   x_{k+1} = combination of y_k, y_{k-1}, x_k with GammaSchedule ratios.
// Appendix: the combination re-derived from the three-sequence method,
//   x_{k+1} = (Gamma_k/Gamma_{k+1}) y_k
//           + (gamma_k/gamma_{k+1}) ((mu/4L) x_k + y_k)
//           - (gamma_k/gamma_{k+1}) (Gamma_{k-1}/Gamma_k) y_{k-1},
// whose coefficients sum to 1 at a fixed point.  Maintext: the combination as
// displayed in the algorithm listing (kept for comparison).  k = 0 uses
// y_{-1} := y_0 and Gamma_{-1} := 0.
enum class FgmVariant { Appendix, Maintext };
RunTrace fgm(InexactOracle& oracle, const LossOracle& loss_ref, const Reference& ref,
             const Vec& x0, double L, double mu, int K,
             FgmVariant variant = FgmVariant::Appendix, const TraceOptions& topt = {});

// Proximal model built around the similarity proxy L_hat:
//   phi_k(x) = L_hat(x) + <g_tilde - grad L_hat(x_k), x> + |x - x_k|^2 / (2 eta).
struct ProxSubproblem {
  const LossOracle* proxy = nullptr;
  Vec g_tilde;
  Vec grad_proxy_at_xk;
  Vec x_k;
  double eta = 1.0;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
};

// Warm-starts L-BFGS at x_k and stops at the first iterate satisfying
//   |grad phi_k(x)|^2 <= c |x - x_k|^2 + E^2.
// Failure to satisfy the criterion within max_inner returns success = false
// with the best iterate found.
struct ProxResult {
  Vec x_next;
  int inner_iters = 0;
  double criterion_value = 0.0;  // |grad phi_k(x_next)|^2
  double threshold = 0.0;        // c |x_next - x_k|^2 + E^2
  bool success = false;
};
ProxResult solve_prox(const ProxSubproblem& sub, double c, double E, int max_inner);

struct PigsOptions {
  double eta = 1.0;
  double c = 0.0;
  double E = 1e-6;
  int K = 1;
  int max_inner = 500;
  double mu = 0.0;  // weights beta_k = (1 + eta mu / 8)^k; 0 gives a plain average
};

// One oracle round per outer iteration; each round minimizes phi_k inexactly.
// The trace records inner iteration counts, and the run keeps both the last
// iterate and the beta-weighted average of x_0..x_K.  Inner-solver failure
// aborts the run with the failing round recorded.
RunTrace pigs(InexactOracle& oracle, const LossOracle& loss_ref, const LossOracle& proxy,
              const Reference& ref, const Vec& x0, const PigsOptions& options,
              const TraceOptions& topt = {});

}  // namespace byzsim
