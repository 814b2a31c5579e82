#pragma once

#include <cstdint>
#include <limits>

#include "byzsim/aggregation.hpp"
#include "byzsim/attacks.hpp"
#include "byzsim/clients.hpp"

namespace byzsim {

struct OracleConfig {
  AggregatorSpec aggregator;
  AttackStrategy attack;
  std::uint64_t rng_seed = 0;  // reserved for randomized attacks; current ones are deterministic
  bool audit = false;
  double audit_G2 = 0.0;       // certified heterogeneity constants used in the bound
  double audit_B2 = 0.0;
};

struct OracleSample {
  Vec g_tilde;        // aggregated (inexact) gradient
  Vec honest_mean;    // exact grad L_H at the query point
  double err_sq = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();  // audit only
  bool violated = false;
  double attack_param = std::numeric_limits<double>::quiet_NaN();  // line-search winner
};

// One synchronous communication round per call: honest clients report exact
// gradients, Byzantine slots are filled by the attack (which observes the
// honest gradients), and the aggregator produces the inexact gradient.
// Every round asserts the aggregation-robustness inequality
//   |g_tilde - mean_H|^2  <=  nu * (1/|H|) sum |g_i - mean_H|^2
// which holds by construction for catalog rules; with audit on, the
// heterogeneity-based bound nu G^2 + nu B^2 |grad L_H|^2 is recorded next to
// the measured error.
class InexactOracle {
 public:
  InexactOracle(const ClientPool& pool, OracleConfig config);

  OracleSample sample(const Vec& x);

  int rounds() const { return rounds_; }
  double nu() const { return nu_; }
  const ClientPool& pool() const { return *pool_; }
  const OracleConfig& config() const { return config_; }

 private:
  const ClientPool* pool_;
  OracleConfig config_;
  double nu_;
  int rounds_ = 0;
};

// nu G^2 + nu B^2 * grad_norm_sq.
double lemma1_bound(double nu, double G2, double B2, double grad_norm_sq);

// Inner-product form of the oracle error bound under Hessian similarity:
//   zeta^2 + alpha * mu * <grad L_H(x), x - x*>
// with alpha = nu * 4 Delta / mu and zeta^2 = nu * grads_at_opt_ms, where
// grads_at_opt_ms = (2/|H|) sum_i |grad L_i(x*)|^2.  A negative inner product
// signals a wrong reference point and is flagged (the bound is evaluated with
// the inner product clamped to zero).
struct Eq8Bound {
  double value = 0.0;
  bool inner_nonnegative = true;
};
Eq8Bound eq8_bound(double nu, double Delta, double mu, double grads_at_opt_ms,
                   double inner);

}  // namespace byzsim
