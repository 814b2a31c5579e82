#pragma once

#include <string>
#include <vector>

#include "byzsim/aggregation.hpp"
#include "byzsim/loss.hpp"

namespace byzsim {

enum class AttackKind { None, Alie, Ipm };

// Byzantine strategy: an omniscient adversary that sees every honest gradient
// of the round and has all f corrupted clients submit the same vector.
struct AttackStrategy {
  AttackKind kind = AttackKind::None;
  double param = 1.0;           // z for ALIE, epsilon for IPM
  bool line_search = false;
  std::vector<double> grid;     // line-search grid (defaults set by parse)
};

// mean - z * (coordinate-wise population standard deviation).
Vec alie(const std::vector<Vec>& honest_grads, double z);

// -epsilon * mean.
Vec ipm(const std::vector<Vec>& honest_grads, double epsilon);

// Evaluates the attack parameter over the grid, fills all f Byzantine slots
// of a simulated round with the candidate, and keeps the candidate whose
// aggregate deviates most from the honest mean; ties go to the smallest
// parameter.  f is taken from the aggregator spec.
struct LineSearchChoice {
  double param = 0.0;
  Vec vector;
  double deviation = 0.0;
};
LineSearchChoice line_search_scale(const AttackStrategy& attack,
                                   const std::vector<Vec>& honest_grads,
                                   const AggregatorSpec& aggregator);

// The single colluding vector submitted by every Byzantine slot this round
// (runs the line search when the strategy enables it).
Vec byzantine_vector(const AttackStrategy& attack,
                     const std::vector<Vec>& honest_grads,
                     const AggregatorSpec& aggregator);

// "alie", "ipm", "alie:ls", "ipm:ls", "none".
AttackStrategy parse_attack(const std::string& text);
std::string attack_string(const AttackStrategy& attack);

// Default line-search grids.
const std::vector<double>& default_alie_grid();
const std::vector<double>& default_ipm_grid();

}  // namespace byzsim
