#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "byzsim/rng.hpp"

namespace byzsim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// First-order oracle for one client's local loss.  Implementations are pure:
// value / grad / hvp may be called concurrently from multiple threads.
class LossOracle {
 public:
  virtual ~LossOracle() = default;

  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec grad(const Vec& x) const = 0;

  // Hessian-vector product; optional.
  virtual bool has_hvp() const { return false; }
  virtual Vec hvp(const Vec& x, const Vec& v) const;

  // Curvature constants when known, quiet NaN otherwise.
  virtual double mu() const { return std::numeric_limits<double>::quiet_NaN(); }
  virtual double L() const { return std::numeric_limits<double>::quiet_NaN(); }

  // Closed-form minimizer when one is available.
  virtual std::optional<Vec> minimizer() const { return std::nullopt; }
};

using LossPtr = std::shared_ptr<const LossOracle>;

// 1/2 x'Ax - b'x with A symmetric positive semidefinite.  mu and L are the
// extreme eigenvalues of A; the minimizer A^{-1} b is exposed when A is
// invertible.
class QuadraticLoss final : public LossOracle {
 public:
  QuadraticLoss(Mat A, Vec b, double mu, double L, std::optional<Vec> minimizer);

  int dim() const override { return static_cast<int>(b_.size()); }
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override { return A_ * x - b_; }
  bool has_hvp() const override { return true; }
  Vec hvp(const Vec&, const Vec& v) const override { return A_ * v; }
  double mu() const override { return mu_; }
  double L() const override { return L_; }
  std::optional<Vec> minimizer() const override { return minimizer_; }

  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

 private:
  Mat A_;
  Vec b_;
  double mu_, L_;
  std::optional<Vec> minimizer_;
};

// (1/m) sum log(1 + exp(-y_i a_i'x)) + (lambda/2)|x|^2 with labels in {-1,+1}.
// Evaluation is overflow-safe for arbitrarily large margins.  mu = lambda;
// L = lambda + sigma_max(A'A)/(4m), estimated by power iteration with a small
// safety inflation.
class LogisticLoss final : public LossOracle {
 public:
  LogisticLoss(Mat features, Vec labels, double lambda, double L);

  int dim() const override { return static_cast<int>(features_.cols()); }
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  bool has_hvp() const override { return true; }
  Vec hvp(const Vec& x, const Vec& v) const override;
  double mu() const override { return lambda_; }
  double L() const override { return L_; }

  int samples() const { return static_cast<int>(features_.rows()); }
  // 0-1 accuracy of the linear classifier sign(a'x) against the labels.
  double accuracy(const Vec& x) const;

 private:
  Mat features_;
  Vec labels_;
  double lambda_;
  double L_;
};

// Arithmetic mean of component losses (no weighting): the global objective
// L_H when handed the honest clients.  mu / L are the component means, valid
// bounds since a mean of mu_i-strongly-convex, L_i-smooth functions is
// (mean mu_i)-strongly convex and (mean L_i)-smooth.
class MeanLoss final : public LossOracle {
 public:
  explicit MeanLoss(std::vector<LossPtr> components);

  int dim() const override;
  double value(const Vec& x) const override;
  Vec grad(const Vec& x) const override;
  bool has_hvp() const override;
  Vec hvp(const Vec& x, const Vec& v) const override;
  double mu() const override { return mu_; }
  double L() const override { return L_; }

  const std::vector<LossPtr>& components() const { return components_; }

 private:
  std::vector<LossPtr> components_;
  double mu_, L_;
};

// Validates symmetry (rejects non-symmetric A) and positive semidefiniteness,
// then computes extreme eigenvalues and, when A is invertible, the minimizer.
LossPtr make_quadratic(Mat A, Vec b);

// Validates shapes and labels, estimates the smoothness constant.
LossPtr make_logistic(Mat features, Vec labels, double lambda);

LossPtr make_mean_loss(std::vector<LossPtr> components);

// Central-difference gradient check at `points` draws x ~ N(0, I):
// h = 1e-5 * (1 + |x|), error |g_fd - g| / (1 + |g|), maximized over points.
struct GradCheck {
  double max_rel_err = 0.0;
  int points = 0;
};
GradCheck check_gradient(const LossOracle& loss, Rng& rng, int points = 20);

}  // namespace byzsim
