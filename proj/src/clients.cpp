#include "byzsim/clients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace byzsim {

int ClientPool::dim() const { return honest.front()->dim(); }

double ClientPool::mean_value(const Vec& x) const {
  double sum = 0.0;
  for (const auto& c : honest) sum += c->value(x);
  return sum / static_cast<double>(honest.size());
}

Vec ClientPool::mean_grad(const Vec& x) const {
  Vec sum = Vec::Zero(dim());
  for (const auto& c : honest) sum += c->grad(x);
  return sum / static_cast<double>(honest.size());
}

std::vector<Vec> ClientPool::honest_grads(const Vec& x) const {
  std::vector<Vec> grads;
  grads.reserve(honest.size());
  for (const auto& c : honest) grads.push_back(c->grad(x));
  return grads;
}

ClientPool make_pool(std::vector<LossPtr> honest, std::vector<int> byzantine_indices) {
  if (honest.empty()) throw std::invalid_argument("make_pool: need at least one honest client");
  const int d = honest.front()->dim();
  for (const auto& c : honest)
    if (c->dim() != d) throw std::invalid_argument("make_pool: client dimension mismatch");

  std::sort(byzantine_indices.begin(), byzantine_indices.end());
  const int n = static_cast<int>(honest.size() + byzantine_indices.size());
  for (std::size_t i = 0; i < byzantine_indices.size(); ++i) {
    if (byzantine_indices[i] < 0 || byzantine_indices[i] >= n)
      throw std::invalid_argument("make_pool: Byzantine index out of range");
    if (i > 0 && byzantine_indices[i] == byzantine_indices[i - 1])
      throw std::invalid_argument("make_pool: duplicate Byzantine index");
  }
  return ClientPool{std::move(honest), std::move(byzantine_indices)};
}

ClientPool make_pool(std::vector<LossPtr> honest, int f) {
  if (f < 0) throw std::invalid_argument("make_pool: negative f");
  const int n = static_cast<int>(honest.size()) + f;
  std::vector<int> byz(static_cast<std::size_t>(f));
  std::iota(byz.begin(), byz.end(), n - f);
  return make_pool(std::move(honest), std::move(byz));
}

HeterogeneityEstimate estimate_heterogeneity(const ClientPool& pool,
                                             const std::vector<Vec>& points) {
  if (points.size() < 2)
    throw std::invalid_argument("estimate_heterogeneity: need at least 2 sample points");

  const auto n_pts = points.size();
  std::vector<double> u(n_pts), v(n_pts);  // |grad L_H|^2 and honest variance
  for (std::size_t p = 0; p < n_pts; ++p) {
    const auto grads = pool.honest_grads(points[p]);
    Vec mean = Vec::Zero(pool.dim());
    for (const auto& g : grads) mean += g;
    mean /= static_cast<double>(grads.size());
    double var = 0.0;
    for (const auto& g : grads) var += (g - mean).squaredNorm();
    u[p] = mean.squaredNorm();
    v[p] = var / static_cast<double>(grads.size());
  }

  const double m = static_cast<double>(n_pts);
  const double u_mean = std::accumulate(u.begin(), u.end(), 0.0) / m;
  const double v_mean = std::accumulate(v.begin(), v.end(), 0.0) / m;
  double cov = 0.0, var_u = 0.0;
  for (std::size_t p = 0; p < n_pts; ++p) {
    cov += (u[p] - u_mean) * (v[p] - v_mean);
    var_u += (u[p] - u_mean) * (u[p] - u_mean);
  }

  HeterogeneityEstimate est;
  est.sample_points = static_cast<int>(n_pts);
  est.B2 = var_u > 0.0 ? std::max(cov / var_u, 0.0) : 0.0;
  est.G2 = std::max(v_mean - est.B2 * u_mean, 0.0);

  // Inflate the intercept so the inequality holds at every sampled point.
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n_pts; ++p)
    worst = std::max(worst, v[p] - (est.G2 + est.B2 * u[p]));
  if (worst > 0.0) est.G2 += worst;

  est.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n_pts; ++p)
    est.max_violation = std::max(est.max_violation, v[p] - (est.G2 + est.B2 * u[p]));
  return est;
}

RobustnessBounds byzantine_bounds(double G, double B, double mu, int f, int n) {
  if (!(mu > 0.0)) throw std::invalid_argument("byzantine_bounds: mu must be positive");
  if (f < 0 || f >= n) throw std::invalid_argument("byzantine_bounds: need 0 <= f < n");

  RobustnessBounds out;
  const double B2 = B * B;
  out.breakdown_ok = static_cast<double>(f) * (B2 + 2.0) <= static_cast<double>(n);
  const double denom = static_cast<double>(n) - (2.0 + B2) * static_cast<double>(f);
  out.finite = denom > 0.0;
  if (out.finite) {
    const double ratio = static_cast<double>(f) / denom;
    out.value_bound = (G * G / (8.0 * mu)) * ratio;
    out.gradnorm_bound = (G * G / 4.0) * ratio;
  } else {
    out.value_bound = std::numeric_limits<double>::infinity();
    out.gradnorm_bound = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace byzsim
