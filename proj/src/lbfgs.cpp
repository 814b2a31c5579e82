#include "byzsim/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace byzsim {

LbfgsResult lbfgs_minimize(const std::function<double(const Vec&)>& value,
                           const std::function<Vec(const Vec&)>& gradient,
                           Vec x0,
                           const std::function<bool(const Vec&, const Vec&)>& stop,
                           const LbfgsOptions& options) {
  LbfgsResult result;
  result.x = std::move(x0);

  Vec g = gradient(result.x);
  if (stop(result.x, g)) {
    result.satisfied = true;
    return result;
  }

  std::deque<Vec> s_hist, y_hist;

  while (result.iters < options.max_iters) {
    // Two-loop recursion.
    Vec q = g;
    const auto pairs = s_hist.size();
    std::vector<double> alpha(pairs);
    for (std::size_t i = pairs; i-- > 0;) {
      const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
      alpha[i] = rho * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (pairs > 0) {
      const Vec& s = s_hist.back();
      const Vec& y = y_hist.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t i = 0; i < pairs; ++i) {
      const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
      const double beta = rho * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vec direction = -q;
    double slope = g.dot(direction);
    if (slope >= 0.0) {  // not a descent direction: fall back to steepest descent
      direction = -g;
      slope = -g.squaredNorm();
    }
    if (slope == 0.0) return result;  // stationary but predicate unsatisfied

    // Weak-Wolfe line search by bisection: shrink while sufficient decrease
    // fails, expand while the curvature condition fails.  An accepted step
    // has g_next'd >= wolfe_c * slope, hence s'y > 0.
    const double fx = value(result.x);
    double lo = 0.0;  // largest step known to satisfy sufficient decrease
    double hi = std::numeric_limits<double>::infinity();
    double step = 1.0;
    Vec x_next, g_next;
    bool accepted = false;
    Vec armijo_x, armijo_g;  // best decrease-only step, in case the search caps out
    bool have_armijo = false;
    for (int probe = 0; probe < 64 && step > options.min_step; ++probe) {
      x_next = result.x + step * direction;
      if (!(value(x_next) <= fx + options.armijo_c * step * slope)) {
        hi = step;
      } else {
        g_next = gradient(x_next);
        armijo_x = x_next;
        armijo_g = g_next;
        have_armijo = true;
        if (g_next.dot(direction) < options.wolfe_c * slope) {
          lo = step;
        } else {
          accepted = true;
          break;
        }
      }
      step = std::isinf(hi) ? 2.0 * std::max(lo, step) : 0.5 * (lo + hi);
    }
    if (!accepted) {
      if (!have_armijo) return result;  // line search exhausted
      x_next = std::move(armijo_x);     // settle for decrease without curvature
      g_next = std::move(armijo_g);
    }
    const Vec s = x_next - result.x;
    const Vec y = g_next - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {  // keep only safely positive curvature
      s_hist.push_back(s);
      y_hist.push_back(y);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }

    result.x = std::move(x_next);
    g = std::move(g_next);
    ++result.iters;

    if (stop(result.x, g)) {
      result.satisfied = true;
      return result;
    }
  }
  return result;  // budget exhausted
}

}  // namespace byzsim
