#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numeric>
#include <vector>

#include "byzsim/aggregation.hpp"
#include "byzsim/rng.hpp"

using namespace byzsim;

namespace {

std::vector<Vec> scalars(std::initializer_list<double> values) {
  std::vector<Vec> out;
  for (double v : values) {
    Vec x(1);
    x << v;
    out.push_back(x);
  }
  return out;
}

std::vector<Vec> random_cloud(Rng& rng, int n, int dim, double scale = 1.0) {
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) {
    Vec v(dim);
    for (int j = 0; j < dim; ++j) v[j] = scale * rng.normal();
    out.push_back(v);
  }
  return out;
}

// Brute-force coordinate-wise trimmed mean via a full sort.
Vec cwtm_reference(const std::vector<Vec>& vecs, int f) {
  const int n = static_cast<int>(vecs.size());
  const int d = static_cast<int>(vecs.front().size());
  Vec out(d);
  for (int j = 0; j < d; ++j) {
    std::vector<double> column;
    for (const Vec& v : vecs) column.push_back(v[j]);
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (int i = f; i < n - f; ++i) sum += column[static_cast<std::size_t>(i)];
    out[j] = sum / static_cast<double>(n - 2 * f);
  }
  return out;
}

// Brute-force coordinate-wise median.
Vec cwm_reference(const std::vector<Vec>& vecs) {
  const int n = static_cast<int>(vecs.size());
  const int d = static_cast<int>(vecs.front().size());
  Vec out(d);
  for (int j = 0; j < d; ++j) {
    std::vector<double> column;
    for (const Vec& v : vecs) column.push_back(v[j]);
    std::sort(column.begin(), column.end());
    out[j] = n % 2 == 1 ? column[static_cast<std::size_t>(n / 2)]
                        : 0.5 * (column[static_cast<std::size_t>(n / 2 - 1)] +
                                 column[static_cast<std::size_t>(n / 2)]);
  }
  return out;
}

// Brute-force Krum: recompute every score from scratch.
Vec krum_reference(const std::vector<Vec>& vecs, int f) {
  const int n = static_cast<int>(vecs.size());
  const int k = n - f - 1;
  int best = -1;
  double best_score = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    std::vector<double> dists;
    for (int j = 0; j < n; ++j)
      if (j != i) dists.push_back((vecs[static_cast<std::size_t>(i)] -
                                   vecs[static_cast<std::size_t>(j)]).squaredNorm());
    std::sort(dists.begin(), dists.end());
    double score = 0.0;
    for (int t = 0; t < k; ++t) score += dists[static_cast<std::size_t>(t)];
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return vecs[static_cast<std::size_t>(best)];
}

// Brute-force nearest-neighbor mixing with (distance, index) tie-breaks.
std::vector<Vec> nnm_reference(const std::vector<Vec>& vecs, int f) {
  const int n = static_cast<int>(vecs.size());
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < n; ++j)
      order.emplace_back((vecs[static_cast<std::size_t>(i)] -
                          vecs[static_cast<std::size_t>(j)]).squaredNorm(), j);
    std::sort(order.begin(), order.end());
    Vec avg = Vec::Zero(vecs.front().size());
    for (int t = 0; t < n - f; ++t) avg += vecs[static_cast<std::size_t>(order[static_cast<std::size_t>(t)].second)];
    out.push_back(avg / static_cast<double>(n - f));
  }
  return out;
}

}  // namespace

TEST_CASE("cwtm: trims extremes; hand example") {
  const Vec out = cwtm(scalars({1.0, 2.0, 100.0}), 1);
  CHECK(out[0] == 2.0);

  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cloud = random_cloud(rng, 9, 4, 2.0);
    for (int f : {0, 1, 2, 3}) {
      const Vec got = cwtm(cloud, f);
      CHECK((got - cwtm_reference(cloud, f)).norm() <= 1e-12);
    }
  }
  CHECK_THROWS_AS(cwtm(scalars({1.0, 2.0}), 1), std::invalid_argument);
}

TEST_CASE("cwm: matches a sort-based median, even and odd n") {
  Rng rng(103);
  for (int n : {3, 4, 7, 10}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto cloud = random_cloud(rng, n, 3);
      CHECK((cwm(cloud) - cwm_reference(cloud)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("geometric median: 1-D agrees with the component median") {
  const GmResult gm0 = geometric_median(scalars({0.0, 0.0, 10.0}));
  CHECK(gm0.converged);
  CHECK(std::abs(gm0.point[0]) <= 1e-6);

  Rng rng(107);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cloud = random_cloud(rng, 7, 1, 3.0);
    // The 1-D geometric median is the sample median, a data point; Weiszfeld
    // stalls at the vertex without certifying stationarity, but the
    // best-objective iterate it hands back is still pinned to the median.
    const GmResult gm = geometric_median(cloud);
    CHECK(std::abs(gm.point[0] - cwm_reference(cloud)[0]) <= 1e-5);
  }
}

TEST_CASE("geometric median: permutation invariant, exact on identical points") {
  Rng rng(109);
  auto cloud = random_cloud(rng, 8, 5);
  const Vec base = geometric_median(cloud).point;
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(cloud);
    const Vec perm = geometric_median(cloud).point;
    CHECK((perm - base).norm() <= 1e-9 * (1.0 + base.norm()));
  }

  Vec v(3);
  v << 1.0, -2.0, 0.5;
  const GmResult same = geometric_median({v, v, v});
  CHECK(same.point == v);
  CHECK(same.converged);

  // The geometric median minimizes the summed distances: compare against
  // nearby perturbations.
  const Vec m = base;
  auto objective = [&](const Vec& y) {
    double s = 0.0;
    for (const Vec& x : cloud) s += (x - y).norm();
    return s;
  };
  for (int trial = 0; trial < 20; ++trial) {
    Vec delta(5);
    for (int j = 0; j < 5; ++j) delta[j] = 0.01 * rng.normal();
    CHECK(objective(m) <= objective(m + delta) + 1e-7);
  }
}

TEST_CASE("krum: matches brute-force score recomputation") {
  Rng rng(113);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cloud = random_cloud(rng, 8, 3);
    for (int f : {1, 2}) {
      const Vec got = krum(cloud, f);
      CHECK(got == krum_reference(cloud, f));
    }
  }
  CHECK_THROWS_AS(krum(scalars({1.0, 2.0, 3.0}), 1), std::invalid_argument);  // n < f + 3
}

TEST_CASE("nnm: matches brute force and contracts the spread") {
  Rng rng(127);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cloud = random_cloud(rng, 10, 3);
    const auto mixed = nnm(cloud, 1);
    const auto ref = nnm_reference(cloud, 1);
    REQUIRE(mixed.size() == ref.size());
    for (std::size_t i = 0; i < mixed.size(); ++i)
      CHECK((mixed[i] - ref[i]).norm() <= 1e-12);
  }
}

TEST_CASE("gts: mean of the n - f smallest norms; hand example") {
  const Vec out = gts(scalars({1.0, -1.0, 50.0}), 1);
  CHECK(out[0] == 0.0);

  // Norm tie: {3, -3, 2} with f = 1 keeps {3, -3}? No: norms are (3, 3, 2);
  // the two smallest by (norm, index) are 2 and the first 3.
  const Vec tie = gts(scalars({3.0, -3.0, 2.0}), 1);
  CHECK(tie[0] == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("frg mixing: two honest vectors average to their midpoint") {
  Rng rng(131);
  const auto cloud = random_cloud(rng, 2, 4);
  const auto mixed = frg_mix(cloud, 0);
  const Vec mid = 0.5 * (cloud[0] + cloud[1]);
  CHECK((mixed[0] - mid).norm() <= 1e-12);
  CHECK((mixed[1] - mid).norm() <= 1e-12);
}

TEST_CASE("aggregate: mixing chain composes left to right before the rule") {
  Rng rng(137);
  const auto cloud = random_cloud(rng, 9, 4);
  const AggregatorSpec spec = parse_aggregator("nnm+cwtm", 1);
  const Vec got = aggregate(spec, cloud);
  const Vec manual = cwtm(nnm(cloud, 1), 1);
  CHECK(got == manual);

  const AggregatorSpec chain = parse_aggregator("frg(gts)+nnm+cwm", 1);
  const Vec got2 = aggregate(chain, cloud);
  const Vec manual2 = cwm(nnm(frg_mix(cloud, 1), 1));
  CHECK(got2 == manual2);
}

TEST_CASE("robustness coefficients: catalog values") {
  CHECK(robustness_coefficient(parse_aggregator("cwtm", 1), 10) ==
        doctest::Approx(0.75 * 1.75).epsilon(1e-14));  // 6/8 (1 + 6/8)
  CHECK(robustness_coefficient(parse_aggregator("krum", 1), 10) ==
        doctest::Approx(6.0 * 1.75).epsilon(1e-14));
  CHECK(robustness_coefficient(parse_aggregator("gm", 1), 10) ==
        doctest::Approx(4.0 * 1.265625).epsilon(1e-14));  // 4 (1 + 1/8)^2
  CHECK(robustness_coefficient(parse_aggregator("cwm", 1), 10) ==
        robustness_coefficient(parse_aggregator("gm", 1), 10));
  CHECK(robustness_coefficient(parse_aggregator("mean", 0), 10) == 0.0);
  CHECK(std::isinf(robustness_coefficient(parse_aggregator("mean", 1), 10)));

  // NNM composition at (n, f) = (21, 1): delta = 8/20, nu_tilde = delta (1 + nu).
  const double nu_cwtm = (6.0 / 19.0) * (1.0 + 6.0 / 19.0);
  CHECK(robustness_coefficient(parse_aggregator("nnm+cwtm", 1), 21) ==
        doctest::Approx(0.4 * (1.0 + nu_cwtm)).epsilon(1e-14));

  // The GTS summand is declared with rho = 4, so F-RG matches NNM's delta.
  CHECK(robustness_coefficient(parse_aggregator("frg(gts)+cwtm", 1), 21) ==
        doctest::Approx(robustness_coefficient(parse_aggregator("nnm+cwtm", 1), 21))
            .epsilon(1e-14));

  // A two-mixing chain folds from the rule outward.
  const double inner = 0.4 * (1.0 + nu_cwtm);
  CHECK(robustness_coefficient(parse_aggregator("nnm+nnm+cwtm", 1), 21) ==
        doctest::Approx(0.4 * (1.0 + inner)).epsilon(1e-14));
}

TEST_CASE("robustness coefficients: never beat the lower bound") {
  for (int n : {5, 7, 10, 15, 21}) {
    for (int f : {1, 2, 3}) {
      if (n <= 3 * f) continue;  // keep every rule's precondition satisfied
      const double lower = robustness_lower_bound(n, f);
      for (const char* rule : {"cwtm", "cwm", "gm", "krum"}) {
        if (std::string(rule) == "krum" && n < f + 3) continue;
        CHECK(robustness_coefficient(parse_aggregator(rule, f), n) >= lower);
      }
    }
  }
}

TEST_CASE("robustness coefficients: breakdown regimes throw") {
  CHECK_THROWS_AS(robustness_coefficient(parse_aggregator("cwtm", 2), 4),
                  std::invalid_argument);  // n <= 2f
  CHECK_THROWS_AS(robustness_coefficient(parse_aggregator("krum", 3), 5),
                  std::invalid_argument);  // n < f + 3
  CHECK_THROWS_AS(robustness_coefficient(parse_aggregator("nnm+cwtm", 1), 9),
                  std::invalid_argument);  // NNM needs 9f < n
  CHECK_THROWS_AS(robustness_coefficient(parse_aggregator("frg(gts)+cwtm", 1), 9),
                  std::invalid_argument);  // F-RG needs (2 rho + 1) f < n
}

TEST_CASE("parse_aggregator: round trips and rejects junk") {
  for (const char* text : {"mean", "cwtm", "cwm", "gm", "krum", "nnm+cwtm",
                           "frg(gts)+gm", "nnm+nnm+krum"}) {
    const AggregatorSpec spec = parse_aggregator(text, 2);
    CHECK(aggregator_string(spec) == text);
    CHECK(spec.f == 2);
  }
  CHECK_THROWS_AS(parse_aggregator("median", 1), std::invalid_argument);
  CHECK_THROWS_AS(parse_aggregator("cwtm+nnm", 1), std::invalid_argument);  // rule not last
  CHECK_THROWS_AS(parse_aggregator("", 1), std::invalid_argument);
}

TEST_CASE("verify_robustness: mean fails with an outlier, robust rules hold") {
  const auto cloud = scalars({0.0, 0.1, -0.1, 10.0});
  const RobustnessCheck mean_check =
      verify_robustness(parse_aggregator("mean", 1), cloud, 1);
  CHECK_FALSE(mean_check.holds);

  for (const char* rule : {"cwtm", "cwm", "gm", "krum"}) {
    const RobustnessCheck check = verify_robustness(parse_aggregator(rule, 1), cloud, 1);
    CHECK(check.holds);
    CHECK(check.worst_ratio <= check.nu);
  }
}

TEST_CASE("verify_robustness: zero-variance subsets") {
  // All equal vectors: every subset has zero variance and zero error.
  Vec v(2);
  v << 1.0, 2.0;
  const std::vector<Vec> same = {v, v, v, v};
  const RobustnessCheck check = verify_robustness(parse_aggregator("cwtm", 1), same, 1);
  CHECK(check.holds);
  CHECK_FALSE(check.infinite);
  CHECK(check.worst_ratio == 0.0);

  // Zero-variance subset but nonzero aggregation error: mean with one outlier
  // where the three honest clients coincide.
  const std::vector<Vec> outlier = {v, v, v, 10.0 * v};
  const RobustnessCheck bad = verify_robustness(parse_aggregator("mean", 1), outlier, 1);
  CHECK_FALSE(bad.holds);
  CHECK(bad.infinite);
}

TEST_CASE("verify_robustness_trials: catalog rules hold over random clouds") {
  for (const char* rule : {"cwtm", "cwm", "gm", "krum"}) {
    const AggregatorSpec spec = parse_aggregator(rule, 1);
    const RobustnessCheck check = verify_robustness_trials(spec, 7, 25, 4, 555);
    CHECK(check.holds);
    CHECK_FALSE(check.infinite);
    CHECK(check.worst_ratio <= check.nu);
    CHECK(check.worst_ratio > 0.0);
  }

  const RobustnessCheck mixed =
      verify_robustness_trials(parse_aggregator("nnm+cwtm", 1), 12, 25, 4, 556);
  CHECK(mixed.holds);
  CHECK(mixed.worst_ratio <= mixed.nu);
}

TEST_CASE("aggregate: mean of an empty list throws, dimension mismatch throws") {
  CHECK_THROWS_AS(mean({}), std::invalid_argument);
  Vec a(2), b(3);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(mean({a, b}), std::invalid_argument);
}
