#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "byzsim/loss.hpp"

namespace byzsim {

// A labeled dataset: one row per sample, integer class labels (binary data
// uses -1 / +1).
struct Dataset {
  Mat features;               // m x d
  std::vector<int> labels;    // size m
};

// CSV loader: first column label (+-1 or class id), remaining columns
// features.  A header row is auto-detected by a non-numeric first cell.
Dataset load_csv(const std::string& path);

// Seeded two-class Gaussian mixture: class +1 centered at +mean, class -1 at
// -mean, unit covariance, mean = separation * ones / sqrt(dim).  Labels are
// fair coin flips.
Dataset make_gaussian_mixture(int samples, int dim, double separation, std::uint64_t seed);

// Maps a two-valued label set onto {-1, +1} (smaller value -> -1).
Vec binary_labels(const std::vector<int>& labels);

// Splits sample indices across clients with per-class proportions drawn from
// Dirichlet(beta, ..., beta).  Deterministic given the seed; the whole
// partition is redrawn (bounded retries) until no client is empty.
std::vector<std::vector<int>> dirichlet_partition(const std::vector<int>& labels,
                                                  int n_clients, double beta,
                                                  std::uint64_t seed);

}  // namespace byzsim
