#include "byzsim/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace byzsim {

InexactOracle::InexactOracle(const ClientPool& pool, OracleConfig config)
    : pool_(&pool), config_(std::move(config)) {
  if (config_.aggregator.f != pool.f())
    throw std::invalid_argument("InexactOracle: aggregator f does not match pool f");
  nu_ = robustness_coefficient(config_.aggregator, pool.n());
}

OracleSample InexactOracle::sample(const Vec& x) {
  if (x.size() != pool_->dim())
    throw std::invalid_argument("InexactOracle: query dimension mismatch");
  ++rounds_;

  const std::vector<Vec> grads = pool_->honest_grads(x);
  OracleSample out;
  {
    Vec sum = Vec::Zero(x.size());
    for (const auto& g : grads) sum += g;
    out.honest_mean = sum / static_cast<double>(grads.size());
  }

  const int f = pool_->f();
  if (f == 0 && config_.aggregator.rule == AggRule::Mean && config_.aggregator.mixings.empty()) {
    // No adversary, plain mean: the oracle is exact by construction.
    out.g_tilde = out.honest_mean;
  } else {
    std::vector<Vec> round(static_cast<std::size_t>(pool_->n()));
    Vec byz;
    if (f > 0) {
      if (config_.attack.kind != AttackKind::None && config_.attack.line_search) {
        auto choice = line_search_scale(config_.attack, grads, config_.aggregator);
        byz = std::move(choice.vector);
        out.attack_param = choice.param;
      } else {
        byz = byzantine_vector(config_.attack, grads, config_.aggregator);
        if (config_.attack.kind != AttackKind::None) out.attack_param = config_.attack.param;
      }
    }
    std::size_t next_byz = 0, next_honest = 0;
    for (int slot = 0; slot < pool_->n(); ++slot) {
      const bool is_byz = next_byz < pool_->byzantine_indices.size() &&
                          pool_->byzantine_indices[next_byz] == slot;
      if (is_byz) {
        round[static_cast<std::size_t>(slot)] = byz;
        ++next_byz;
      } else {
        round[static_cast<std::size_t>(slot)] = grads[next_honest++];
      }
    }
    out.g_tilde = aggregate(config_.aggregator, std::move(round));
  }

  out.err_sq = (out.g_tilde - out.honest_mean).squaredNorm();

  // Robustness identity of the aggregation, checked on every round: the
  // deviation from the honest mean never exceeds nu times the honest
  // empirical variance (definitionally guaranteed for catalog rules).
  if (std::isfinite(nu_)) {
    double variance = 0.0;
    for (const auto& g : grads) variance += (g - out.honest_mean).squaredNorm();
    variance /= static_cast<double>(grads.size());
    const double cap = nu_ * variance;
    if (out.err_sq > cap + 1e-9 * (1.0 + cap))
      throw std::logic_error("InexactOracle: aggregation deviated beyond nu * variance");
  }

  if (config_.audit) {
    out.bound = lemma1_bound(nu_, config_.audit_G2, config_.audit_B2,
                             out.honest_mean.squaredNorm());
    out.violated = out.err_sq > out.bound * (1.0 + 1e-12) + 1e-15;
  }
  return out;
}

double lemma1_bound(double nu, double G2, double B2, double grad_norm_sq) {
  if (nu < 0.0 || G2 < 0.0 || B2 < 0.0 || grad_norm_sq < 0.0)
    throw std::invalid_argument("lemma1_bound: inputs must be nonnegative");
  return nu * G2 + nu * B2 * grad_norm_sq;
}

Eq8Bound eq8_bound(double nu, double Delta, double mu, double grads_at_opt_ms, double inner) {
  if (nu < 0.0 || Delta < 0.0 || grads_at_opt_ms < 0.0)
    throw std::invalid_argument("eq8_bound: coefficients must be nonnegative");
  if (!(mu > 0.0)) throw std::invalid_argument("eq8_bound: mu must be positive");

  Eq8Bound out;
  out.inner_nonnegative = inner >= 0.0;
  const double zeta_sq = nu * grads_at_opt_ms;
  const double alpha = nu * 4.0 * Delta / mu;
  out.value = zeta_sq + alpha * mu * std::max(inner, 0.0);
  return out;
}

}  // namespace byzsim
