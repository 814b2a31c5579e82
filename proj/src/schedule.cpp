#include "byzsim/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace byzsim {

GammaSchedule::GammaSchedule(double L, double mu, int K) : L_(L), mu_(mu), K_(K) {
  if (!(L > 0.0)) throw std::invalid_argument("GammaSchedule: L must be positive");
  if (mu < 0.0) throw std::invalid_argument("GammaSchedule: mu must be nonnegative");
  if (K < 1) throw std::invalid_argument("GammaSchedule: K must be >= 1");

  gamma_.reserve(static_cast<std::size_t>(K) + 1);
  Gamma_.reserve(static_cast<std::size_t>(K) + 1);
  rho_.reserve(static_cast<std::size_t>(K));
  p_.reserve(static_cast<std::size_t>(K));
  qm_.reserve(static_cast<std::size_t>(K));

  gamma_.push_back(1.0);
  Gamma_.push_back(1.0);

  // Scale-free state: a = gamma_k/Gamma_k, u = 1/Gamma_k, qm = Gamma_{k-1}/Gamma_k.
  double a = 1.0;
  double u = 1.0;
  double qm_prev = 0.0;

  for (int k = 0; k < K; ++k) {
    // Defining identity divided by Gamma_k: 2L u + mu/2 = 2L s^2 / (1 + s)
    // with s = gamma_{k+1}/Gamma_k; solve the quadratic for the positive root.
    const double c = 2.0 * L * u + mu / 2.0;
    const double s = (c + std::sqrt(c * c + 8.0 * L * c)) / (4.0 * L);
    const double t = 1.0 + s;  // Gamma_{k+1}/Gamma_k

    rho_.push_back(a / s);
    qm_.push_back(qm_prev);
    p_.push_back(1.0 / t);

    const double residual = std::abs(2.0 * L * u + mu / 2.0 - 2.0 * L * s * s / t);
    if (residual > max_residual_) max_residual_ = residual;

    gamma_.push_back(s * Gamma_.back());  // may overflow to +inf at large k
    Gamma_.push_back(t * Gamma_.back());

    a = s / t;
    u = u / t;
    qm_prev = 1.0 / t;
  }
}

}  // namespace byzsim
