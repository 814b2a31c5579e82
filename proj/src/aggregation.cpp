#include "byzsim/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "byzsim/rng.hpp"

namespace byzsim {

namespace {

void require_nonempty(const std::vector<Vec>& vectors, const char* who) {
  if (vectors.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
  const auto d = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != d)
      throw std::invalid_argument(std::string(who) + ": inputs have mixed dimensions");
}

// Indices of `vectors` ordered by (key, index): deterministic lowest-index
// tie-breaking everywhere a sort on distances or norms happens.
std::vector<int> order_by_key(const std::vector<double>& keys) {
  std::vector<int> idx(keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
  });
  return idx;
}

}  // namespace

Vec mean(const std::vector<Vec>& vectors) {
  require_nonempty(vectors, "mean");
  Vec sum = Vec::Zero(vectors.front().size());
  for (const auto& v : vectors) sum += v;
  return sum / static_cast<double>(vectors.size());
}

Vec cwtm(const std::vector<Vec>& vectors, int f) {
  require_nonempty(vectors, "cwtm");
  const int n = static_cast<int>(vectors.size());
  if (n <= 2 * f) throw std::invalid_argument("cwtm: requires n > 2f");

  const auto d = vectors.front().size();
  Vec out(d);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = vectors[static_cast<std::size_t>(i)][j];
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (int i = f; i < n - f; ++i) sum += column[static_cast<std::size_t>(i)];
    out[j] = sum / static_cast<double>(n - 2 * f);
  }
  return out;
}

Vec cwm(const std::vector<Vec>& vectors) {
  require_nonempty(vectors, "cwm");
  const int n = static_cast<int>(vectors.size());
  const auto d = vectors.front().size();
  Vec out(d);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = vectors[static_cast<std::size_t>(i)][j];
    std::sort(column.begin(), column.end());
    out[j] = n % 2 == 1 ? column[static_cast<std::size_t>(n / 2)]
                        : 0.5 * (column[static_cast<std::size_t>(n / 2 - 1)] +
                                 column[static_cast<std::size_t>(n / 2)]);
  }
  return out;
}

GmResult geometric_median(const std::vector<Vec>& vectors, double tol, int max_iter) {
  require_nonempty(vectors, "geometric_median");
  constexpr double kSmooth = 1e-12;
  const double n = static_cast<double>(vectors.size());

  auto objective = [&](const Vec& m) {
    double sum = 0.0;
    for (const auto& v : vectors) sum += (v - m).norm();
    return sum;
  };

  GmResult result;
  result.point = mean(vectors);
  Vec best = result.point;
  double best_obj = objective(best);

  for (int it = 0; it < max_iter; ++it) {
    // Stationarity residual of the smoothed objective at the current point.
    Vec residual = Vec::Zero(result.point.size());
    double weight_sum = 0.0;
    Vec weighted = Vec::Zero(result.point.size());
    for (const auto& v : vectors) {
      const double dist = std::max((v - result.point).norm(), kSmooth);
      residual += (v - result.point) / dist;
      weighted += v / dist;
      weight_sum += 1.0 / dist;
    }
    if (residual.norm() <= tol * n) {
      result.converged = true;
      result.iters = it;
      return result;
    }
    result.point = weighted / weight_sum;
    const double obj = objective(result.point);
    if (obj < best_obj) {
      best_obj = obj;
      best = result.point;
    }
  }
  // Budget exhausted: hand back the best iterate with the warning flag unset.
  result.point = best;
  result.iters = max_iter;
  result.converged = false;
  return result;
}

Vec krum(const std::vector<Vec>& vectors, int f, int neighbors) {
  require_nonempty(vectors, "krum");
  const int n = static_cast<int>(vectors.size());
  if (n < f + 3) throw std::invalid_argument("krum: requires n >= f + 3");
  const int k = neighbors > 0 ? std::min(neighbors, n - 1) : n - f - 1;

  int best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> dists(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      dists[static_cast<std::size_t>(j)] =
          (vectors[static_cast<std::size_t>(i)] - vectors[static_cast<std::size_t>(j)]).squaredNorm();
    dists[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();  // exclude self
    std::sort(dists.begin(), dists.end());
    const double score = std::accumulate(dists.begin(), dists.begin() + k, 0.0);
    if (score < best_score) {  // strict: ties keep the lowest index
      best_score = score;
      best = i;
    }
  }
  return vectors[static_cast<std::size_t>(best)];
}

std::vector<Vec> nnm(const std::vector<Vec>& vectors, int f) {
  require_nonempty(vectors, "nnm");
  const int n = static_cast<int>(vectors.size());
  if (n <= f) throw std::invalid_argument("nnm: requires n > f");

  std::vector<Vec> out(vectors.size());
  std::vector<double> dists(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      dists[static_cast<std::size_t>(j)] =
          (vectors[static_cast<std::size_t>(i)] - vectors[static_cast<std::size_t>(j)]).squaredNorm();
    const auto order = order_by_key(dists);
    Vec sum = Vec::Zero(vectors.front().size());
    for (int r = 0; r < n - f; ++r) sum += vectors[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(n - f);
  }
  return out;
}

Vec gts(const std::vector<Vec>& diffs, int f) {
  require_nonempty(diffs, "gts");
  const int n = static_cast<int>(diffs.size());
  if (n <= f) throw std::invalid_argument("gts: requires n > f");

  std::vector<double> norms(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) norms[static_cast<std::size_t>(i)] = diffs[static_cast<std::size_t>(i)].norm();
  const auto order = order_by_key(norms);
  Vec sum = Vec::Zero(diffs.front().size());
  for (int r = 0; r < n - f; ++r) sum += diffs[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
  return sum / static_cast<double>(n - f);
}

std::vector<Vec> frg_mix(const std::vector<Vec>& vectors, int f) {
  require_nonempty(vectors, "frg_mix");
  const int n = static_cast<int>(vectors.size());
  if (n <= f) throw std::invalid_argument("frg_mix: requires n > f");

  std::vector<Vec> out(vectors.size());
  std::vector<Vec> diffs(vectors.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      diffs[static_cast<std::size_t>(j)] = vectors[static_cast<std::size_t>(i)] - vectors[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = vectors[static_cast<std::size_t>(i)] - gts(diffs, f);
  }
  return out;
}

Vec aggregate(const AggregatorSpec& spec, std::vector<Vec> vectors) {
  require_nonempty(vectors, "aggregate");
  for (const Mixing m : spec.mixings) {
    switch (m) {
      case Mixing::NNM: vectors = nnm(vectors, spec.f); break;
      case Mixing::FRG_GTS: vectors = frg_mix(vectors, spec.f); break;
    }
  }
  switch (spec.rule) {
    case AggRule::Mean: return mean(vectors);
    case AggRule::CWTM: return cwtm(vectors, spec.f);
    case AggRule::CWM: return cwm(vectors);
    case AggRule::GM: return geometric_median(vectors, spec.gm_tol, spec.gm_max_iter).point;
    case AggRule::Krum: return krum(vectors, spec.f, spec.krum_neighbors);
  }
  throw std::logic_error("aggregate: unreachable");
}

double robustness_lower_bound(int n, int f) {
  if (n <= 2 * f) throw std::invalid_argument("robustness_lower_bound: requires n > 2f");
  return static_cast<double>(f) / static_cast<double>(n - 2 * f);
}

double robustness_coefficient(const AggregatorSpec& spec, int n) {
  const int f = spec.f;
  if (f < 0 || f >= n) throw std::invalid_argument("robustness_coefficient: need 0 <= f < n");

  double nu = 0.0;
  const double trim_ratio = n > 2 * f ? 6.0 * f / static_cast<double>(n - 2 * f) : 0.0;
  switch (spec.rule) {
    case AggRule::Mean:
      nu = f == 0 ? 0.0 : std::numeric_limits<double>::infinity();
      break;
    case AggRule::CWTM:
      if (n <= 2 * f) throw std::invalid_argument("robustness_coefficient: CWTM needs n > 2f");
      nu = trim_ratio * (1.0 + trim_ratio);
      break;
    case AggRule::Krum:
      if (n <= 2 * f) throw std::invalid_argument("robustness_coefficient: Krum needs n > 2f");
      if (n < f + 3) throw std::invalid_argument("robustness_coefficient: Krum needs n >= f + 3");
      nu = 6.0 * (1.0 + trim_ratio);
      break;
    case AggRule::GM:
    case AggRule::CWM: {
      if (n <= 2 * f)
        throw std::invalid_argument("robustness_coefficient: GM/CWM needs n > 2f");
      const double r = 1.0 + static_cast<double>(f) / static_cast<double>(n - 2 * f);
      nu = 4.0 * r * r;
      break;
    }
  }

  // The chain wraps the rule left to right, so coefficients compose from the
  // rule outward: fold the mixings right to left with nu <- delta (1 + nu).
  for (auto it = spec.mixings.rbegin(); it != spec.mixings.rend(); ++it) {
    double delta = 0.0;
    switch (*it) {
      case Mixing::NNM:
        if (f > 0 && 9 * f >= n)
          throw std::invalid_argument("robustness_coefficient: NNM breakdown (needs f/n < 1/9)");
        delta = 8.0 * f / static_cast<double>(n - f);
        break;
      case Mixing::FRG_GTS:
        if (f > 0 && (2.0 * spec.frg_rho + 1.0) * f >= n)
          throw std::invalid_argument(
              "robustness_coefficient: F-RG breakdown (needs f/n < 1/(2 rho + 1))");
        delta = 2.0 * spec.frg_rho * f / static_cast<double>(n - f);
        break;
    }
    nu = delta * (1.0 + nu);
  }
  return nu;
}

AggregatorSpec parse_aggregator(const std::string& text, int f) {
  AggregatorSpec spec;
  spec.f = f;

  std::vector<std::string> tokens;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, '+')) tokens.push_back(token);
  if (tokens.empty()) throw std::invalid_argument("parse_aggregator: empty string");

  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i] == "nnm") spec.mixings.push_back(Mixing::NNM);
    else if (tokens[i] == "frg(gts)") spec.mixings.push_back(Mixing::FRG_GTS);
    else throw std::invalid_argument("parse_aggregator: unknown mixing '" + tokens[i] + "'");
  }

  const std::string& rule = tokens.back();
  if (rule == "mean") spec.rule = AggRule::Mean;
  else if (rule == "cwtm") spec.rule = AggRule::CWTM;
  else if (rule == "cwm") spec.rule = AggRule::CWM;
  else if (rule == "gm") spec.rule = AggRule::GM;
  else if (rule == "krum") spec.rule = AggRule::Krum;
  else throw std::invalid_argument("parse_aggregator: unknown rule '" + rule + "'");
  return spec;
}

std::string aggregator_string(const AggregatorSpec& spec) {
  std::string out;
  for (const Mixing m : spec.mixings)
    out += m == Mixing::NNM ? "nnm+" : "frg(gts)+";
  switch (spec.rule) {
    case AggRule::Mean: out += "mean"; break;
    case AggRule::CWTM: out += "cwtm"; break;
    case AggRule::CWM: out += "cwm"; break;
    case AggRule::GM: out += "gm"; break;
    case AggRule::Krum: out += "krum"; break;
  }
  return out;
}

RobustnessCheck verify_robustness(const AggregatorSpec& spec,
                                  const std::vector<Vec>& vectors, int f) {
  require_nonempty(vectors, "verify_robustness");
  const int n = static_cast<int>(vectors.size());
  if (n > 12) throw std::invalid_argument("verify_robustness: n > 12 (exhaustive enumeration)");
  if (f < 0 || f >= n) throw std::invalid_argument("verify_robustness: need 0 <= f < n");

  AggregatorSpec checked = spec;
  checked.f = f;

  RobustnessCheck out;
  out.nu = robustness_coefficient(checked, n);
  const Vec F = aggregate(checked, vectors);

  // Enumerate every subset S of size n - f.
  const int s = n - f;
  std::vector<int> subset(static_cast<std::size_t>(s));
  std::iota(subset.begin(), subset.end(), 0);
  for (;;) {
    Vec subset_mean = Vec::Zero(vectors.front().size());
    for (const int i : subset) subset_mean += vectors[static_cast<std::size_t>(i)];
    subset_mean /= static_cast<double>(s);
    double variance = 0.0;
    for (const int i : subset)
      variance += (vectors[static_cast<std::size_t>(i)] - subset_mean).squaredNorm();
    variance /= static_cast<double>(s);
    const double err = (F - subset_mean).squaredNorm();

    if (variance == 0.0) {
      if (err > 0.0) out.infinite = true;
      // err == 0 contributes ratio 0: nothing to do.
    } else {
      out.worst_ratio = std::max(out.worst_ratio, err / variance);
    }

    // Advance to the next combination.
    int pos = s - 1;
    while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == n - s + pos) --pos;
    if (pos < 0) break;
    ++subset[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < s; ++q)
      subset[static_cast<std::size_t>(q)] = subset[static_cast<std::size_t>(q - 1)] + 1;
  }

  out.holds = !out.infinite && std::isfinite(out.nu) && out.worst_ratio <= out.nu;
  return out;
}

RobustnessCheck verify_robustness_trials(const AggregatorSpec& spec, int n, int trials,
                                         int dim, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("verify_robustness_trials: need trials >= 1");
  if (dim < 1) throw std::invalid_argument("verify_robustness_trials: need dim >= 1");
  Rng rng(seed);
  RobustnessCheck worst;
  worst.nu = robustness_coefficient(spec, n);
  worst.holds = true;
  for (int t = 0; t < trials; ++t) {
    std::vector<Vec> vectors;
    vectors.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      // Scales spread over three orders of magnitude, with an occasional far
      // outlier, so trials visit tight clusters and wild spreads alike.
      double scale = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
      if (rng.uniform() < 0.1) scale *= 100.0;
      Vec v(dim);
      for (int k = 0; k < dim; ++k) v[k] = scale * rng.normal();
      vectors.push_back(std::move(v));
    }
    const RobustnessCheck check = verify_robustness(spec, vectors, spec.f);
    worst.worst_ratio = std::max(worst.worst_ratio, check.worst_ratio);
    worst.infinite = worst.infinite || check.infinite;
    worst.holds = worst.holds && check.holds;
  }
  return worst;
}

}  // namespace byzsim
