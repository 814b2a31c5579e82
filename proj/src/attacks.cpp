#include "byzsim/attacks.hpp"

#include <cmath>
#include <stdexcept>

namespace byzsim {

namespace {

Vec honest_mean(const std::vector<Vec>& grads) {
  Vec sum = Vec::Zero(grads.front().size());
  for (const auto& g : grads) sum += g;
  return sum / static_cast<double>(grads.size());
}

}  // namespace

const std::vector<double>& default_alie_grid() {
  static const std::vector<double> grid{0.1, 0.3, 1.0, 3.0, 10.0, 30.0};
  return grid;
}

const std::vector<double>& default_ipm_grid() {
  static const std::vector<double> grid{0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  return grid;
}

Vec alie(const std::vector<Vec>& honest_grads, double z) {
  if (honest_grads.empty()) throw std::invalid_argument("alie: no honest gradients");
  const Vec mu = honest_mean(honest_grads);
  Vec var = Vec::Zero(mu.size());
  for (const auto& g : honest_grads) var += (g - mu).cwiseAbs2();
  var /= static_cast<double>(honest_grads.size());  // population variance
  return mu - z * var.cwiseSqrt();
}

Vec ipm(const std::vector<Vec>& honest_grads, double epsilon) {
  if (honest_grads.empty()) throw std::invalid_argument("ipm: no honest gradients");
  return -epsilon * honest_mean(honest_grads);
}

LineSearchChoice line_search_scale(const AttackStrategy& attack,
                                   const std::vector<Vec>& honest_grads,
                                   const AggregatorSpec& aggregator) {
  if (attack.kind == AttackKind::None)
    throw std::invalid_argument("line_search_scale: no attack to scale");
  const std::vector<double>& grid =
      !attack.grid.empty() ? attack.grid
                           : (attack.kind == AttackKind::Alie ? default_alie_grid()
                                                              : default_ipm_grid());
  if (grid.empty()) throw std::invalid_argument("line_search_scale: empty grid");

  const Vec mu = honest_mean(honest_grads);
  const int f = aggregator.f;

  LineSearchChoice best;
  bool first = true;
  for (const double param : grid) {
    const Vec candidate = attack.kind == AttackKind::Alie ? alie(honest_grads, param)
                                                          : ipm(honest_grads, param);
    std::vector<Vec> round = honest_grads;
    for (int i = 0; i < f; ++i) round.push_back(candidate);
    const double deviation = (aggregate(aggregator, std::move(round)) - mu).norm();
    // Ties go to the smallest parameter.
    if (first || deviation > best.deviation ||
        (deviation == best.deviation && param < best.param)) {
      best = LineSearchChoice{param, candidate, deviation};
      first = false;
    }
  }
  return best;
}

Vec byzantine_vector(const AttackStrategy& attack,
                     const std::vector<Vec>& honest_grads,
                     const AggregatorSpec& aggregator) {
  switch (attack.kind) {
    case AttackKind::None:
      return Vec::Zero(honest_grads.front().size());
    case AttackKind::Alie:
      return attack.line_search ? line_search_scale(attack, honest_grads, aggregator).vector
                                : alie(honest_grads, attack.param);
    case AttackKind::Ipm:
      return attack.line_search ? line_search_scale(attack, honest_grads, aggregator).vector
                                : ipm(honest_grads, attack.param);
  }
  throw std::logic_error("byzantine_vector: unreachable");
}

AttackStrategy parse_attack(const std::string& text) {
  AttackStrategy out;
  std::string base = text;
  if (base.size() > 3 && base.substr(base.size() - 3) == ":ls") {
    out.line_search = true;
    base = base.substr(0, base.size() - 3);
  }
  if (base == "none") {
    if (out.line_search) throw std::invalid_argument("parse_attack: 'none' takes no ':ls'");
    out.kind = AttackKind::None;
  } else if (base == "alie") {
    out.kind = AttackKind::Alie;
  } else if (base == "ipm") {
    out.kind = AttackKind::Ipm;
  } else {
    throw std::invalid_argument("parse_attack: unknown attack '" + text + "'");
  }
  return out;
}

std::string attack_string(const AttackStrategy& attack) {
  std::string base;
  switch (attack.kind) {
    case AttackKind::None: return "none";
    case AttackKind::Alie: base = "alie"; break;
    case AttackKind::Ipm: base = "ipm"; break;
  }
  return attack.line_search ? base + ":ls" : base;
}

}  // namespace byzsim
