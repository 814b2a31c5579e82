#include "byzsim/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "byzsim/rng.hpp"

namespace byzsim {

namespace {

bool parse_double(const std::string& cell, double& out) {
  try {
    std::size_t consumed = 0;
    out = std::stod(cell, &consumed);
    // allow trailing spaces only
    while (consumed < cell.size() && std::isspace(static_cast<unsigned char>(cell[consumed])))
      ++consumed;
    return consumed == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto begin = cell.find_first_not_of(" \t\r");
    const auto end = cell.find_last_not_of(" \t\r");
    cells.push_back(begin == std::string::npos ? "" : cell.substr(begin, end - begin + 1));
  }
  return cells;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  bool seen_first = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    double first = 0.0;
    const bool header_candidate = !seen_first;
    seen_first = true;
    if (header_candidate && !parse_double(cells.front(), first)) continue;  // header row
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!parse_double(cells[i], row[i]))
        throw std::runtime_error("load_csv: non-numeric cell at " + path + ":" +
                                 std::to_string(line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("load_csv: ragged row at " + path + ":" + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: no data rows in " + path);
  if (rows.front().size() < 2)
    throw std::runtime_error("load_csv: need a label column plus features in " + path);

  Dataset ds;
  const auto m = rows.size();
  const auto d = rows.front().size() - 1;
  ds.features.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  ds.labels.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    ds.labels[i] = static_cast<int>(std::llround(rows[i][0]));
    for (std::size_t j = 0; j < d; ++j)
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j + 1];
  }
  return ds;
}

Dataset make_gaussian_mixture(int samples, int dim, double separation, std::uint64_t seed) {
  if (samples < 1 || dim < 1)
    throw std::invalid_argument("make_gaussian_mixture: need samples >= 1, dim >= 1");
  Rng rng(seed);
  const double offset = separation / std::sqrt(static_cast<double>(dim));

  Dataset ds;
  ds.features.resize(samples, dim);
  ds.labels.resize(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const int label = rng.uniform() < 0.5 ? -1 : 1;
    ds.labels[static_cast<std::size_t>(i)] = label;
    for (int j = 0; j < dim; ++j)
      ds.features(i, j) = label * offset + rng.normal();
  }
  return ds;
}

Vec binary_labels(const std::vector<int>& labels) {
  std::vector<int> distinct(labels);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() != 2)
    throw std::invalid_argument("binary_labels: need exactly 2 classes, got " +
                                std::to_string(distinct.size()));
  Vec y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = labels[i] == distinct[0] ? -1.0 : 1.0;
  return y;
}

std::vector<std::vector<int>> dirichlet_partition(const std::vector<int>& labels,
                                                  int n_clients, double beta,
                                                  std::uint64_t seed) {
  if (n_clients < 1) throw std::invalid_argument("dirichlet_partition: n_clients >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("dirichlet_partition: beta > 0");
  if (labels.empty()) throw std::invalid_argument("dirichlet_partition: empty dataset");

  // Group sample indices by class, classes in ascending id order.
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(static_cast<int>(i));

  Rng rng(seed);
  const int max_attempts = 200;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<std::vector<int>> clients(static_cast<std::size_t>(n_clients));
    for (auto& [cls, indices] : by_class) {
      (void)cls;
      // Dirichlet(beta) shares via normalized gamma variates.
      std::vector<double> w(static_cast<std::size_t>(n_clients));
      double total = 0.0;
      for (auto& wi : w) {
        wi = rng.gamma(beta);
        total += wi;
      }
      for (auto& wi : w) wi /= total;

      std::vector<int> shuffled(indices);
      rng.shuffle(shuffled);

      // Largest-remainder apportionment of the class's samples.
      const int m_c = static_cast<int>(shuffled.size());
      std::vector<int> counts(static_cast<std::size_t>(n_clients));
      std::vector<std::pair<double, int>> remainders;
      int assigned = 0;
      for (int c = 0; c < n_clients; ++c) {
        const double quota = w[static_cast<std::size_t>(c)] * m_c;
        counts[static_cast<std::size_t>(c)] = static_cast<int>(std::floor(quota));
        assigned += counts[static_cast<std::size_t>(c)];
        remainders.emplace_back(-(quota - std::floor(quota)), c);  // negative: sort descending
      }
      std::sort(remainders.begin(), remainders.end());
      for (int r = 0; r < m_c - assigned; ++r)
        ++counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(r)].second)];

      int cursor = 0;
      for (int c = 0; c < n_clients; ++c) {
        for (int k = 0; k < counts[static_cast<std::size_t>(c)]; ++k)
          clients[static_cast<std::size_t>(c)].push_back(shuffled[static_cast<std::size_t>(cursor++)]);
      }
    }

    const bool ok = std::none_of(clients.begin(), clients.end(),
                                 [](const std::vector<int>& c) { return c.empty(); });
    if (ok) return clients;
  }
  throw std::runtime_error("dirichlet_partition: retry budget exhausted (dataset too small "
                           "for " + std::to_string(n_clients) + " nonempty clients)");
}

}  // namespace byzsim
