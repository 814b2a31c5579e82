#include "byzsim/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace byzsim {

Vec LossOracle::hvp(const Vec&, const Vec&) const {
  throw std::logic_error("LossOracle: Hessian-vector product not available");
}

// ---- quadratic ---------------------------------------------------------------

QuadraticLoss::QuadraticLoss(Mat A, Vec b, double mu, double L, std::optional<Vec> minimizer)
    : A_(std::move(A)), b_(std::move(b)), mu_(mu), L_(L), minimizer_(std::move(minimizer)) {}

double QuadraticLoss::value(const Vec& x) const {
  return 0.5 * x.dot(A_ * x) - b_.dot(x);
}

LossPtr make_quadratic(Mat A, Vec b) {
  if (A.rows() != A.cols()) throw std::invalid_argument("make_quadratic: A must be square");
  if (A.rows() != b.size()) throw std::invalid_argument("make_quadratic: A/b dimension mismatch");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("make_quadratic: A must be symmetric");

  Eigen::SelfAdjointEigenSolver<Mat> eig(A, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo < -1e-10 * scale)
    throw std::invalid_argument("make_quadratic: A must be positive semidefinite");

  const double mu = std::max(lo, 0.0);
  std::optional<Vec> minimizer;
  if (mu > 1e-12 * scale) minimizer = A.ldlt().solve(b);
  return std::make_shared<QuadraticLoss>(std::move(A), std::move(b), mu, hi, std::move(minimizer));
}

// ---- logistic ----------------------------------------------------------------

namespace {

// log(1 + exp(-t)) without overflow for any t.
inline double log_one_plus_exp_neg(double t) {
  return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

// sigma(-t) = 1 / (1 + exp(t)) without overflow.
inline double sigmoid_neg(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// Largest eigenvalue of A'A by power iteration (50 rounds, 1% inflation).
double spectral_bound(const Mat& features) {
  Vec v = Vec::Ones(features.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vec w = features.transpose() * (features * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = norm;  // Rayleigh growth factor since |v| = 1
    v = w / norm;
  }
  return lambda * 1.01;
}

}  // namespace

LogisticLoss::LogisticLoss(Mat features, Vec labels, double lambda, double L)
    : features_(std::move(features)), labels_(std::move(labels)), lambda_(lambda), L_(L) {}

double LogisticLoss::value(const Vec& x) const {
  const Vec t = labels_.cwiseProduct(features_ * x);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) sum += log_one_plus_exp_neg(t[i]);
  return sum / static_cast<double>(t.size()) + 0.5 * lambda_ * x.squaredNorm();
}

Vec LogisticLoss::grad(const Vec& x) const {
  const Vec t = labels_.cwiseProduct(features_ * x);
  Vec w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) w[i] = sigmoid_neg(t[i]) * labels_[i];
  return -(features_.transpose() * w) / static_cast<double>(t.size()) + lambda_ * x;
}

Vec LogisticLoss::hvp(const Vec& x, const Vec& v) const {
  const Vec t = labels_.cwiseProduct(features_ * x);
  Vec q(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double s = sigmoid_neg(t[i]);
    q[i] = s * (1.0 - s);  // sigma(t) sigma(-t), labels squared are 1
  }
  const Vec fv = features_ * v;
  return (features_.transpose() * q.cwiseProduct(fv)) / static_cast<double>(t.size()) + lambda_ * v;
}

double LogisticLoss::accuracy(const Vec& x) const {
  const Vec margins = labels_.cwiseProduct(features_ * x);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < margins.size(); ++i)
    if (margins[i] > 0.0) ++correct;
  return static_cast<double>(correct) / static_cast<double>(margins.size());
}

LossPtr make_logistic(Mat features, Vec labels, double lambda) {
  if (features.rows() == 0) throw std::invalid_argument("make_logistic: empty dataset");
  if (features.rows() != labels.size())
    throw std::invalid_argument("make_logistic: feature/label count mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("make_logistic: lambda must be positive");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw std::invalid_argument("make_logistic: labels must be -1 or +1");

  const double L = lambda + spectral_bound(features) / (4.0 * static_cast<double>(features.rows()));
  return std::make_shared<LogisticLoss>(std::move(features), std::move(labels), lambda, L);
}

// ---- mean ----------------------------------------------------------------------

MeanLoss::MeanLoss(std::vector<LossPtr> components) : components_(std::move(components)) {
  double mu_sum = 0.0, L_sum = 0.0;
  for (const auto& c : components_) {
    mu_sum += c->mu();
    L_sum += c->L();
  }
  const double h = static_cast<double>(components_.size());
  mu_ = mu_sum / h;  // NaN propagates when any component is unknown
  L_ = L_sum / h;
}

int MeanLoss::dim() const { return components_.front()->dim(); }

double MeanLoss::value(const Vec& x) const {
  double sum = 0.0;
  for (const auto& c : components_) sum += c->value(x);
  return sum / static_cast<double>(components_.size());
}

Vec MeanLoss::grad(const Vec& x) const {
  Vec sum = Vec::Zero(dim());
  for (const auto& c : components_) sum += c->grad(x);
  return sum / static_cast<double>(components_.size());
}

bool MeanLoss::has_hvp() const {
  for (const auto& c : components_)
    if (!c->has_hvp()) return false;
  return true;
}

Vec MeanLoss::hvp(const Vec& x, const Vec& v) const {
  Vec sum = Vec::Zero(dim());
  for (const auto& c : components_) sum += c->hvp(x, v);
  return sum / static_cast<double>(components_.size());
}

LossPtr make_mean_loss(std::vector<LossPtr> components) {
  if (components.empty()) throw std::invalid_argument("make_mean_loss: no components");
  const int d = components.front()->dim();
  for (const auto& c : components)
    if (c->dim() != d) throw std::invalid_argument("make_mean_loss: dimension mismatch");
  return std::make_shared<MeanLoss>(std::move(components));
}

// ---- finite differences -----------------------------------------------------------

GradCheck check_gradient(const LossOracle& loss, Rng& rng, int points) {
  GradCheck out;
  out.points = points;
  const int d = loss.dim();
  for (int p = 0; p < points; ++p) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.normal();
    const double h = 1e-5 * (1.0 + x.norm());
    const Vec g = loss.grad(x);
    Vec fd(d);
    for (int i = 0; i < d; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (loss.value(xp) - loss.value(xm)) / (2.0 * h);
    }
    const double rel = (fd - g).norm() / (1.0 + g.norm());
    out.max_rel_err = std::max(out.max_rel_err, rel);
  }
  return out;
}

}  // namespace byzsim
