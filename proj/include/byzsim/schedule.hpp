#pragma once

#include <vector>

namespace byzsim {

// Momentum schedule for the fast gradient method: gamma_0 = 1 and each
// gamma_{k+1} is the positive root of
//   2L + Gamma_k mu/2 = 2L gamma_{k+1}^2 / Gamma_{k+1},   Gamma_k = sum gamma_i.
//
// Gamma_k grows geometrically (it overflows double around k ~ 4.5e3 already at
// kappa = 10), so the recursion is advanced in scale-free form: with
// u = 1/Gamma_k and s = gamma_{k+1}/Gamma_k, the defining identity divided by
// Gamma_k reads 2L u + mu/2 = 2L s^2/(1+s), and every quantity stays O(L).
// The update consumes only the three ratios below, which are exact in this
// normalized arithmetic; the absolute sequences are still exposed (and may
// reach +inf at large k) for inspection.
class GammaSchedule {
 public:
  GammaSchedule(double L, double mu, int K);

  int K() const { return K_; }
  double L() const { return L_; }
  double mu() const { return mu_; }

  const std::vector<double>& gamma() const { return gamma_; }  // gamma_0..gamma_K
  const std::vector<double>& Gamma() const { return Gamma_; }  // Gamma_0..Gamma_K

  // Ratios for step k in [0, K):
  double gamma_ratio(int k) const { return rho_[static_cast<std::size_t>(k)]; }          // gamma_k / gamma_{k+1}
  double partial_ratio(int k) const { return p_[static_cast<std::size_t>(k)]; }          // Gamma_k / Gamma_{k+1}
  double prev_partial_ratio(int k) const { return qm_[static_cast<std::size_t>(k)]; }    // Gamma_{k-1} / Gamma_k (0 at k = 0)

  // Largest residual of the defining identity, measured in normalized form
  // (the identity divided by Gamma_k, algebraically the same equation).
  double max_residual() const { return max_residual_; }

 private:
  double L_, mu_;
  int K_;
  std::vector<double> gamma_, Gamma_;
  std::vector<double> rho_, p_, qm_;
  double max_residual_ = 0.0;
};

}  // namespace byzsim
