#include "byzsim/optimizers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "byzsim/lbfgs.hpp"

namespace byzsim {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start, bool enabled) {
  if (!enabled) return 0.0;
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// True when the gap exceeds the guard, including NaN gaps.
bool diverged_gap(double loss_gap) { return !(loss_gap <= kDivergenceGuard); }

}  // namespace

TraceRow trace_row(int round, const Vec& x, const LossOracle& loss_ref, const Reference& ref,
                   double err_sq, double bound, int inner_iters, double wall_ms) {
  TraceRow row;
  row.round = round;
  row.loss_gap = loss_ref.value(x) - ref.f_star;
  row.grad_norm = loss_ref.grad(x).norm();
  row.dist_to_opt = (x - ref.x_star).norm();
  row.oracle_err_sq = err_sq;
  row.lemma1_bound = bound;
  row.inner_iters = inner_iters;
  row.wall_ms = wall_ms;
  return row;
}

RunTrace gd(InexactOracle& oracle, const LossOracle& loss_ref, const Reference& ref,
            const Vec& x0, double eta, int K, const TraceOptions& topt) {
  if (!(eta > 0.0)) throw std::invalid_argument("gd: step size must be positive");
  if (K < 0) throw std::invalid_argument("gd: round count must be nonnegative");

  RunTrace trace;
  Vec x = x0;
  trace.rows.push_back(trace_row(0, x, loss_ref, ref, 0.0, 0.0, 0, 0.0));
  for (int r = 1; r <= K; ++r) {
    const auto start = Clock::now();
    const OracleSample s = oracle.sample(x);
    x -= eta * s.g_tilde;
    const double wall = elapsed_ms(start, topt.record_timing);
    trace.rows.push_back(trace_row(r, x, loss_ref, ref, s.err_sq, s.bound, 0, wall));
    if (diverged_gap(trace.rows.back().loss_gap)) {
      trace.diverged = true;
      trace.diverged_round = r;
      break;
    }
  }
  trace.final_x = x;
  return trace;
}

RunTrace fgm(InexactOracle& oracle, const LossOracle& loss_ref, const Reference& ref,
             const Vec& x0, double L, double mu, int K, FgmVariant variant,
             const TraceOptions& topt) {
  if (!(L > 0.0)) throw std::invalid_argument("fgm: L must be positive");
  if (!(mu >= 0.0)) throw std::invalid_argument("fgm: mu must be nonnegative");
  if (K < 1) throw std::invalid_argument("fgm: needs at least one round");

  const GammaSchedule sched(L, mu, K);
  const double mu_over_4L = mu / (4.0 * L);
  const double inv_2L = 1.0 / (2.0 * L);

  RunTrace trace;
  Vec x = x0;
  Vec y, y_prev;
  trace.rows.push_back(trace_row(0, x, loss_ref, ref, 0.0, 0.0, 0, 0.0));
  for (int k = 0; k < K; ++k) {
    const auto start = Clock::now();
    const OracleSample s = oracle.sample(x);
    y = x - inv_2L * s.g_tilde;
    if (k == 0) y_prev = y;  // y_{-1} := y_0 (its coefficient is 0 anyway)

    const double p = sched.partial_ratio(k);        // Gamma_k / Gamma_{k+1}
    const double rho = sched.gamma_ratio(k);        // gamma_k / gamma_{k+1}
    const double qm = sched.prev_partial_ratio(k);  // Gamma_{k-1} / Gamma_k
    Vec x_next;
    switch (variant) {
      case FgmVariant::Appendix:
        x_next = p * y + rho * (mu_over_4L * x + y) - (rho * qm) * y_prev;
        break;
      case FgmVariant::Maintext:
        x_next = y + (qm * rho) * (y - y_prev) - qm * y + (rho * mu_over_4L) * x;
        break;
    }
    const double wall = elapsed_ms(start, topt.record_timing);

    trace.rows.push_back(trace_row(k + 1, y, loss_ref, ref, s.err_sq, s.bound, 0, wall));
    if (diverged_gap(trace.rows.back().loss_gap)) {
      trace.diverged = true;
      trace.diverged_round = k + 1;
      break;
    }
    x = std::move(x_next);
    y_prev = y;
  }
  trace.final_x = y;
  return trace;
}

double ProxSubproblem::value(const Vec& x) const {
  const Vec shift = g_tilde - grad_proxy_at_xk;
  return proxy->value(x) + shift.dot(x) + (x - x_k).squaredNorm() / (2.0 * eta);
}

Vec ProxSubproblem::gradient(const Vec& x) const {
  return proxy->grad(x) + (g_tilde - grad_proxy_at_xk) + (x - x_k) / eta;
}

ProxResult solve_prox(const ProxSubproblem& sub, double c, double E, int max_inner) {
  if (sub.proxy == nullptr) throw std::invalid_argument("solve_prox: missing proxy loss");
  if (!(sub.eta > 0.0)) throw std::invalid_argument("solve_prox: eta must be positive");
  if (!(c >= 0.0) || !(E >= 0.0))
    throw std::invalid_argument("solve_prox: criterion constants must be nonnegative");
  if (max_inner < 1) throw std::invalid_argument("solve_prox: needs an inner budget");

  LbfgsOptions opts;
  opts.max_iters = max_inner;
  const auto value = [&sub](const Vec& x) { return sub.value(x); };
  const auto gradient = [&sub](const Vec& x) { return sub.gradient(x); };
  const auto stop = [&sub, c, E](const Vec& x, const Vec& g) {
    return g.squaredNorm() <= c * (x - sub.x_k).squaredNorm() + E * E;
  };
  const LbfgsResult res = lbfgs_minimize(value, gradient, sub.x_k, stop, opts);

  ProxResult out;
  out.x_next = res.x;
  out.inner_iters = res.iters;
  out.criterion_value = sub.gradient(res.x).squaredNorm();
  out.threshold = c * (res.x - sub.x_k).squaredNorm() + E * E;
  out.success = res.satisfied;
  return out;
}

RunTrace pigs(InexactOracle& oracle, const LossOracle& loss_ref, const LossOracle& proxy,
              const Reference& ref, const Vec& x0, const PigsOptions& options,
              const TraceOptions& topt) {
  if (!(options.eta > 0.0)) throw std::invalid_argument("pigs: eta must be positive");
  if (!(options.mu >= 0.0)) throw std::invalid_argument("pigs: mu must be nonnegative");
  if (options.K < 0) throw std::invalid_argument("pigs: round count must be nonnegative");

  RunTrace trace;
  Vec x = x0;

  // Weighted average of x_0..x_K with weights beta_k = r^k, r = 1 + eta mu / 8.
  // Kept in normalized form: S_k = (sum_{j<=k} beta_j)/beta_k = S_{k-1}/r + 1,
  // x_hat_k = (x_hat_{k-1} S_{k-1}/r + x_k) / S_k.  Never touches r^k itself.
  const double r = 1.0 + options.eta * options.mu / 8.0;
  double S = 1.0;
  Vec x_hat = x;

  double worst_margin = -std::numeric_limits<double>::infinity();
  bool any_accepted = false;

  trace.rows.push_back(trace_row(0, x, loss_ref, ref, 0.0, 0.0, 0, 0.0));
  for (int k = 1; k <= options.K; ++k) {
    const auto start = Clock::now();
    const OracleSample s = oracle.sample(x);

    ProxSubproblem sub;
    sub.proxy = &proxy;
    sub.g_tilde = s.g_tilde;
    sub.grad_proxy_at_xk = proxy.grad(x);
    sub.x_k = x;
    sub.eta = options.eta;
    const ProxResult pr = solve_prox(sub, options.c, options.E, options.max_inner);

    x = pr.x_next;
    const double wall = elapsed_ms(start, topt.record_timing);

    if (!pr.success) {
      trace.rows.push_back(
          trace_row(k, x, loss_ref, ref, s.err_sq, s.bound, pr.inner_iters, wall));
      trace.inner_failed = true;
      trace.inner_failed_round = k;
      break;
    }
    any_accepted = true;
    worst_margin = std::max(worst_margin, pr.criterion_value - pr.threshold);

    const double S_prev_over_r = S / r;
    S = S_prev_over_r + 1.0;
    x_hat = (x_hat * S_prev_over_r + x) / S;

    trace.rows.push_back(
        trace_row(k, x, loss_ref, ref, s.err_sq, s.bound, pr.inner_iters, wall));
    if (diverged_gap(trace.rows.back().loss_gap)) {
      trace.diverged = true;
      trace.diverged_round = k;
      break;
    }
  }
  trace.final_x = x;
  trace.weighted_average = x_hat;
  if (any_accepted) trace.max_eq6_violation = worst_margin;
  return trace;
}

}  // namespace byzsim
