#pragma once

#include <functional>

#include "byzsim/loss.hpp"

namespace byzsim {

struct LbfgsOptions {
  int memory = 10;
  double armijo_c = 1e-4;   // sufficient-decrease constant
  double wolfe_c = 0.9;     // curvature constant (weak Wolfe)
  int max_iters = 500;
  double min_step = 1e-20;  // line-search floor before giving up
};

struct LbfgsResult {
  Vec x;
  int iters = 0;        // accepted steps
  bool satisfied = false;  // stop predicate reached (vs. budget exhausted)
};

// Limited-memory BFGS with a weak-Wolfe bisection line search (sufficient
// decrease plus a curvature condition, so every accepted step has s'y > 0 and
// the history never starves).  The caller's stop predicate is evaluated at x0
// and after every accepted step, receiving the iterate and its gradient; the
// first satisfying iterate is returned.  When the two-loop direction fails to
// descend, the step falls back to -gradient.
LbfgsResult lbfgs_minimize(const std::function<double(const Vec&)>& value,
                           const std::function<Vec(const Vec&)>& gradient,
                           Vec x0,
                           const std::function<bool(const Vec&, const Vec&)>& stop,
                           const LbfgsOptions& options = {});

}  // namespace byzsim
