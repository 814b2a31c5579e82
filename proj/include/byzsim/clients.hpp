#pragma once

#include <vector>

#include "byzsim/loss.hpp"

namespace byzsim {

// One round's worth of participants: n - f honest losses plus f Byzantine
// wire positions.  byzantine_indices records which of the n slots the
// adversary owns; honest clients fill the remaining slots in order.
struct ClientPool {
  std::vector<LossPtr> honest;
  std::vector<int> byzantine_indices;  // sorted, unique, in [0, n)

  int f() const { return static_cast<int>(byzantine_indices.size()); }
  int n() const { return static_cast<int>(honest.size()) + f(); }
  int dim() const;

  double mean_value(const Vec& x) const;        // (1/|H|) sum L_i(x)
  Vec mean_grad(const Vec& x) const;            // (1/|H|) sum grad L_i(x)
  std::vector<Vec> honest_grads(const Vec& x) const;
};

// Validates the partition structure: indices unique, in range, at least one
// honest client, consistent dimensions.
ClientPool make_pool(std::vector<LossPtr> honest, std::vector<int> byzantine_indices);
// Convenience: the f Byzantine clients take the last f wire positions.
ClientPool make_pool(std::vector<LossPtr> honest, int f);

// Certificate that honest gradient variance is bounded by G2 + B2 |grad|^2
// on the sampled points.  max_violation <= 0 after inflation.
struct HeterogeneityEstimate {
  double G2 = 0.0;
  double B2 = 0.0;
  int sample_points = 0;
  double max_violation = 0.0;
};

// Least-squares fit of per-point variance against |grad L_H|^2 with both
// coefficients clamped to be nonnegative, then G2 inflated by the largest
// positive residual so the inequality holds at every sampled point.
HeterogeneityEstimate estimate_heterogeneity(const ClientPool& pool,
                                             const std::vector<Vec>& points);

// Guarantees for mu-strongly-convex losses under (G,B)-heterogeneity:
//   breakdown_ok   <=>  f/n <= 1/(B^2 + 2)
//   value_bound     =   (G^2 / 8mu) * f / (n - (2 + B^2) f)
//   gradnorm_bound  =   (G^2 / 4)   * f / (n - (2 + B^2) f)
// Bounds are +infinity (finite = false) when the denominator is not positive.
struct RobustnessBounds {
  bool breakdown_ok = false;
  double value_bound = 0.0;
  double gradnorm_bound = 0.0;
  bool finite = false;
};
RobustnessBounds byzantine_bounds(double G, double B, double mu, int f, int n);

}  // namespace byzsim
