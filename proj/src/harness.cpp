#include "byzsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "byzsim/attacks.hpp"
#include "byzsim/data.hpp"
#include "byzsim/oracle.hpp"
#include "byzsim/rng.hpp"

namespace byzsim {

// ---- configuration ----------------------------------------------------------

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known)
      throw std::invalid_argument("unknown " + std::string(where) + " config key \"" +
                                  it.key() + "\"");
  }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  check_keys(j,
             {"problem", "n", "f", "aggregator", "attack", "attack_param", "optimizer", "K",
              "eta", "fgm_variant", "pigs_eta", "pigs_c", "pigs_E", "max_inner", "audit",
              "audit_points", "record_timing", "seed", "output", "holdout_csv"},
             "experiment");
  ExperimentConfig c;
  if (j.contains("problem")) {
    const nlohmann::json& p = j.at("problem");
    if (!p.is_object()) throw std::invalid_argument("\"problem\" must be a JSON object");
    check_keys(p,
               {"type", "dim", "kappa", "shift", "samples_per_client", "heterogeneity",
                "lambda", "shared_data", "path", "beta"},
               "problem");
    read_field(p, "type", c.problem.type);
    read_field(p, "dim", c.problem.dim);
    read_field(p, "kappa", c.problem.kappa);
    read_field(p, "shift", c.problem.shift);
    read_field(p, "samples_per_client", c.problem.samples_per_client);
    read_field(p, "heterogeneity", c.problem.heterogeneity);
    read_field(p, "lambda", c.problem.lambda);
    read_field(p, "shared_data", c.problem.shared_data);
    read_field(p, "path", c.problem.path);
    read_field(p, "beta", c.problem.beta);
  }
  read_field(j, "n", c.n);
  read_field(j, "f", c.f);
  read_field(j, "aggregator", c.aggregator);
  read_field(j, "attack", c.attack);
  read_field(j, "attack_param", c.attack_param);
  read_field(j, "optimizer", c.optimizer);
  read_field(j, "K", c.K);
  read_field(j, "eta", c.eta);
  read_field(j, "fgm_variant", c.fgm_variant);
  read_field(j, "pigs_eta", c.pigs_eta);
  read_field(j, "pigs_c", c.pigs_c);
  read_field(j, "pigs_E", c.pigs_E);
  read_field(j, "max_inner", c.max_inner);
  read_field(j, "audit", c.audit);
  read_field(j, "audit_points", c.audit_points);
  read_field(j, "record_timing", c.record_timing);
  read_field(j, "seed", c.seed);
  read_field(j, "output", c.output);
  read_field(j, "holdout_csv", c.holdout_csv);
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json p{{"type", config.problem.type},
                   {"dim", config.problem.dim},
                   {"kappa", config.problem.kappa},
                   {"shift", config.problem.shift},
                   {"samples_per_client", config.problem.samples_per_client},
                   {"heterogeneity", config.problem.heterogeneity},
                   {"lambda", config.problem.lambda},
                   {"shared_data", config.problem.shared_data},
                   {"path", config.problem.path},
                   {"beta", config.problem.beta}};
  return nlohmann::json{{"problem", std::move(p)},
                        {"n", config.n},
                        {"f", config.f},
                        {"aggregator", config.aggregator},
                        {"attack", config.attack},
                        {"attack_param", config.attack_param},
                        {"optimizer", config.optimizer},
                        {"K", config.K},
                        {"eta", config.eta},
                        {"fgm_variant", config.fgm_variant},
                        {"pigs_eta", config.pigs_eta},
                        {"pigs_c", config.pigs_c},
                        {"pigs_E", config.pigs_E},
                        {"max_inner", config.max_inner},
                        {"audit", config.audit},
                        {"audit_points", config.audit_points},
                        {"record_timing", config.record_timing},
                        {"seed", config.seed},
                        {"output", config.output},
                        {"holdout_csv", config.holdout_csv}};
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void apply_override(nlohmann::json& j, const std::string& key_eq_value) {
  const std::size_t eq = key_eq_value.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like key=value: \"" + key_eq_value + "\"");
  const std::string key = key_eq_value.substr(0, eq);
  const std::string value = key_eq_value.substr(eq + 1);

  nlohmann::json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty())
      throw std::invalid_argument("override has an empty key segment: \"" + key + "\"");
    if (dot == std::string::npos) {
      nlohmann::json parsed = nlohmann::json::parse(value, nullptr, /*allow_exceptions=*/false);
      (*node)[part] = parsed.is_discarded() ? nlohmann::json(value) : std::move(parsed);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

// ---- problem construction -----------------------------------------------------

namespace {

Vec normal_vec(Rng& rng, int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v;
}

int honest_count(const ExperimentConfig& config) {
  if (config.n < 1) throw std::invalid_argument("n must be at least 1");
  if (config.f < 0 || config.f >= config.n)
    throw std::invalid_argument("f must satisfy 0 <= f < n");
  return config.n - config.f;
}

// Exact-gradient descent on the full honest mean, step 1/L, until
// |grad| <= 1e-10 (capped at 1e6 iterations).
Reference exact_gd_reference(const LossOracle& loss, double L) {
  Vec x = Vec::Zero(loss.dim());
  const double step = 1.0 / L;
  for (int it = 0; it < 1000000; ++it) {
    const Vec g = loss.grad(x);
    if (g.norm() <= 1e-10) break;
    x -= step * g;
  }
  Reference ref;
  ref.f_star = loss.value(x);
  ref.x_star = std::move(x);
  return ref;
}

void build_quadratic(const ExperimentConfig& config, Rng& rng, BuiltProblem& bp) {
  const ProblemConfig& p = config.problem;
  const int h = honest_count(config);
  const int d = p.dim;
  if (d < 1) throw std::invalid_argument("quadratic: dim must be at least 1");
  if (!(p.kappa >= 1.0)) throw std::invalid_argument("quadratic: kappa must be >= 1");
  if (p.shift < 0.0) throw std::invalid_argument("quadratic: shift must be nonnegative");

  Vec eigs(d);
  for (int i = 0; i < d; ++i)
    eigs[i] = d == 1 ? p.kappa : 1.0 + (p.kappa - 1.0) * i / (d - 1);
  const Mat A = eigs.asDiagonal();
  const Vec b_bar = normal_vec(rng, d);

  // Per-client offsets c_i with sum 0 and mean squared norm shift^2, so the
  // honest gradients are grad L_H(x) - c_i: exactly (G = shift, B = 0).
  std::vector<Vec> offsets(static_cast<std::size_t>(h), Vec::Zero(d));
  if (p.shift > 0.0) {
    if (h < 2)
      throw std::invalid_argument("quadratic: shift > 0 needs at least two honest clients");
    Vec sum = Vec::Zero(d);
    for (auto& c : offsets) {
      c = normal_vec(rng, d);
      sum += c;
    }
    double mean_sq = 0.0;
    for (auto& c : offsets) {
      c -= sum / h;
      mean_sq += c.squaredNorm();
    }
    mean_sq /= h;
    if (!(mean_sq > 0.0)) throw std::runtime_error("quadratic: degenerate offset draw");
    const double scale = p.shift / std::sqrt(mean_sq);
    for (auto& c : offsets) c *= scale;
  }

  std::vector<LossPtr> honest;
  honest.reserve(static_cast<std::size_t>(h));
  for (const auto& c : offsets) honest.push_back(make_quadratic(A, b_bar + c));

  bp.loss_ref = make_quadratic(A, b_bar);
  bp.proxy = honest.front();
  bp.L = bp.loss_ref->L();
  bp.mu = bp.loss_ref->mu();
  bp.ref.x_star = *bp.loss_ref->minimizer();
  bp.ref.f_star = bp.loss_ref->value(bp.ref.x_star);
  bp.pool = make_pool(std::move(honest), config.f);
}

void build_synthetic_logistic(const ExperimentConfig& config, Rng& rng, BuiltProblem& bp) {
  const ProblemConfig& p = config.problem;
  const int h = honest_count(config);
  const int d = p.dim;
  const int m = p.samples_per_client;
  if (d < 1) throw std::invalid_argument("synthetic_logistic: dim must be at least 1");
  if (m < 2)
    throw std::invalid_argument("synthetic_logistic: samples_per_client must be at least 2");
  if (!(p.lambda > 0.0)) throw std::invalid_argument("synthetic_logistic: lambda must be positive");
  if (p.heterogeneity < 0.0)
    throw std::invalid_argument("synthetic_logistic: heterogeneity must be nonnegative");

  const Vec base_mean = normal_vec(rng, d);
  const auto sample_client = [&](const Vec& mean) {
    Mat X(m, d);
    Vec y(m);
    const int m_pos = m / 2;
    for (int r = 0; r < m; ++r) {
      const double label = r < m_pos ? 1.0 : -1.0;
      X.row(r) = (label * mean + normal_vec(rng, d)).transpose();
      y[r] = label;
    }
    return make_logistic(std::move(X), std::move(y), p.lambda);
  };

  std::vector<LossPtr> honest;
  honest.reserve(static_cast<std::size_t>(h));
  if (p.shared_data) {
    const LossPtr one = sample_client(base_mean);
    honest.assign(static_cast<std::size_t>(h), one);
  } else {
    for (int i = 0; i < h; ++i)
      honest.push_back(sample_client(base_mean + p.heterogeneity * normal_vec(rng, d)));
  }

  // The mean of h copies of one loss is that loss; use it directly so the
  // homogeneous reference is exact (and h times cheaper).
  bp.loss_ref = p.shared_data ? honest.front() : make_mean_loss(honest);
  bp.proxy = honest.front();
  bp.mu = p.lambda;
  bp.L = 0.0;
  for (const auto& c : honest) bp.L = std::max(bp.L, c->L());
  bp.ref = exact_gd_reference(*bp.loss_ref, bp.L);
  bp.pool = make_pool(std::move(honest), config.f);
}

void build_csv_logistic(const ExperimentConfig& config, Rng& rng, BuiltProblem& bp) {
  const ProblemConfig& p = config.problem;
  const int h = honest_count(config);
  if (p.path.empty()) throw std::invalid_argument("csv_logistic: problem.path is required");
  if (!(p.lambda > 0.0)) throw std::invalid_argument("csv_logistic: lambda must be positive");

  const Dataset ds = load_csv(p.path);
  const Vec y = binary_labels(ds.labels);
  const int m = static_cast<int>(ds.labels.size());

  std::vector<std::vector<int>> parts;
  if (p.beta > 0.0) {
    parts = dirichlet_partition(ds.labels, h, p.beta, rng.next_u64());
  } else {
    if (m < h)
      throw std::invalid_argument("csv_logistic: fewer samples than honest clients");
    parts.resize(static_cast<std::size_t>(h));
    for (int i = 0; i < m; ++i) parts[static_cast<std::size_t>(i % h)].push_back(i);
  }

  std::vector<LossPtr> honest;
  honest.reserve(static_cast<std::size_t>(h));
  for (const auto& part : parts) {
    Mat X(part.size(), ds.features.cols());
    Vec yc(part.size());
    for (std::size_t r = 0; r < part.size(); ++r) {
      X.row(static_cast<Eigen::Index>(r)) = ds.features.row(part[r]);
      yc[static_cast<Eigen::Index>(r)] = y[part[r]];
    }
    honest.push_back(make_logistic(std::move(X), std::move(yc), p.lambda));
  }

  bp.loss_ref = make_mean_loss(honest);
  bp.proxy = honest.front();
  bp.mu = p.lambda;
  bp.L = 0.0;
  for (const auto& c : honest) bp.L = std::max(bp.L, c->L());
  bp.ref = exact_gd_reference(*bp.loss_ref, bp.L);
  bp.pool = make_pool(std::move(honest), config.f);
}

}  // namespace

BuiltProblem build_problem(const ExperimentConfig& config) {
  Rng rng(config.seed);
  BuiltProblem bp;
  if (config.problem.type == "quadratic") {
    build_quadratic(config, rng, bp);
  } else if (config.problem.type == "synthetic_logistic") {
    build_synthetic_logistic(config, rng, bp);
  } else if (config.problem.type == "csv_logistic") {
    build_csv_logistic(config, rng, bp);
  } else {
    throw std::invalid_argument("unknown problem type \"" + config.problem.type +
                                "\" (expected quadratic, synthetic_logistic or csv_logistic)");
  }

  // Audit points: the start point, the reference minimizer, and draws around
  // the minimizer at the radius of the x0 -> x* segment, so the certificate
  // covers the region an optimizer actually visits.
  const int d = bp.pool.dim();
  const int points = std::max(config.audit_points, 2);
  bp.audit_points.clear();
  bp.audit_points.reserve(static_cast<std::size_t>(points));
  bp.audit_points.push_back(Vec::Zero(d));
  bp.audit_points.push_back(bp.ref.x_star);
  double radius = bp.ref.x_star.norm();
  if (radius < 1e-12) radius = 1.0;
  for (int i = 2; i < points; ++i)
    bp.audit_points.push_back(bp.ref.x_star + radius * normal_vec(rng, d));
  bp.het = estimate_heterogeneity(bp.pool, bp.audit_points);
  return bp;
}

// ---- experiment driver ----------------------------------------------------------

namespace {

// Spectral norm of (mean Hessian - proxy Hessian) at x by power iteration on
// the symmetric difference operator.
double estimate_similarity(const LossOracle& mean_loss, const LossOracle& proxy, const Vec& x,
                           Rng& rng) {
  if (!mean_loss.has_hvp() || !proxy.has_hvp())
    return std::numeric_limits<double>::quiet_NaN();
  Vec v = normal_vec(rng, mean_loss.dim());
  const double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;
  double estimate = 0.0;
  for (int it = 0; it < 100; ++it) {
    const Vec w = mean_loss.hvp(x, v) - proxy.hvp(x, v);
    estimate = w.norm();
    if (estimate < 1e-14) return 0.0;  // indistinguishable from the zero operator
    v = w / estimate;
  }
  return estimate;
}

double holdout_accuracy_of(const std::string& path, const Vec& w) {
  const Dataset ds = load_csv(path);
  const Vec y = binary_labels(ds.labels);
  if (ds.features.cols() != w.size())
    throw std::invalid_argument("holdout_csv: feature dimension " +
                                std::to_string(ds.features.cols()) +
                                " does not match the model dimension " +
                                std::to_string(w.size()));
  int correct = 0;
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i)
    if (y[i] * ds.features.row(i).dot(w) > 0.0) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.features.rows());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  BuiltProblem bp = build_problem(config);

  OracleConfig ocfg;
  ocfg.aggregator = parse_aggregator(config.aggregator, config.f);
  ocfg.attack = parse_attack(config.attack);
  ocfg.attack.param = config.attack_param;
  ocfg.rng_seed = config.seed;
  ocfg.audit = config.audit;
  ocfg.audit_G2 = bp.het.G2;
  ocfg.audit_B2 = bp.het.B2;
  InexactOracle oracle(bp.pool, ocfg);

  ExperimentResult out;
  out.ref = bp.ref;
  out.nu = oracle.nu();
  out.G2 = bp.het.G2;
  out.B2 = bp.het.B2;
  out.L = bp.L;
  out.mu = bp.mu;

  Rng aux_rng(config.seed ^ 0xa0761d6478bd642fULL);  // stream independent of problem generation
  out.delta_hat = estimate_similarity(*bp.loss_ref, *bp.proxy, bp.ref.x_star, aux_rng);

  const Vec x0 = Vec::Zero(bp.pool.dim());
  TraceOptions topt;
  topt.record_timing = config.record_timing;

  if (config.optimizer == "gd") {
    const double eta = config.eta > 0.0 ? config.eta : 1.0 / bp.L;
    out.trace = gd(oracle, *bp.loss_ref, bp.ref, x0, eta, config.K, topt);
  } else if (config.optimizer == "fgm") {
    FgmVariant variant;
    if (config.fgm_variant == "appendix") {
      variant = FgmVariant::Appendix;
    } else if (config.fgm_variant == "maintext") {
      variant = FgmVariant::Maintext;
    } else {
      throw std::invalid_argument("fgm_variant must be \"appendix\" or \"maintext\"");
    }
    out.trace = fgm(oracle, *bp.loss_ref, bp.ref, x0, bp.L, bp.mu, config.K, variant, topt);
  } else if (config.optimizer == "pigs") {
    if (!(config.pigs_eta > 0.0))
      throw std::invalid_argument("pigs needs pigs_eta > 0");
    PigsOptions po;
    po.eta = config.pigs_eta;
    po.c = config.pigs_c >= 0.0 ? config.pigs_c : 1e-3 / config.pigs_eta;
    po.E = config.pigs_E;
    po.K = config.K;
    po.max_inner = config.max_inner;
    po.mu = bp.mu;
    out.trace = pigs(oracle, *bp.loss_ref, *bp.proxy, bp.ref, x0, po, topt);
    out.eta_consistent = config.pigs_eta * (out.delta_hat + 8.0 * po.c / bp.mu) <= 1.0;
  } else if (config.optimizer == "audit") {
    // Pseudo-optimizer: one oracle round at each certified audit point, so the
    // recorded bound column is backed by the certificate at every row.
    RunTrace trace;
    trace.rows.push_back(trace_row(0, x0, *bp.loss_ref, bp.ref, 0.0, 0.0, 0, 0.0));
    int round = 0;
    for (const Vec& point : bp.audit_points) {
      const OracleSample s = oracle.sample(point);
      ++round;
      trace.rows.push_back(
          trace_row(round, point, *bp.loss_ref, bp.ref, s.err_sq, s.bound, 0, 0.0));
    }
    trace.final_x = bp.audit_points.back();
    out.trace = std::move(trace);
  } else {
    throw std::invalid_argument("unknown optimizer \"" + config.optimizer +
                                "\" (expected gd, fgm, pigs or audit)");
  }

  if (!config.holdout_csv.empty())
    out.holdout_accuracy = holdout_accuracy_of(config.holdout_csv, out.trace.final_x);
  if (!config.output.empty()) emit_csv(out.trace, config.output);
  return out;
}

// ---- trace analysis ------------------------------------------------------------

int rounds_to_target(const RunTrace& trace, double target) {
  for (const TraceRow& row : trace.rows)
    if (row.loss_gap <= target) return row.round;
  return -1;
}

double plateau(const RunTrace& trace) {
  if (trace.rows.empty()) throw std::invalid_argument("plateau: empty trace");
  const std::size_t n = trace.rows.size();
  const std::size_t start = (n * 3) / 4;
  std::vector<double> tail;
  tail.reserve(n - start);
  for (std::size_t i = start; i < n; ++i) tail.push_back(trace.rows[i].loss_gap);
  std::sort(tail.begin(), tail.end());
  const std::size_t mid = tail.size() / 2;
  if (tail.size() % 2 == 1) return tail[mid];
  return 0.5 * (tail[mid - 1] + tail[mid]);
}

std::vector<CompareRow> compare_runs(const std::vector<const RunTrace*>& traces,
                                     const std::vector<std::string>& names, double target) {
  if (traces.empty()) throw std::invalid_argument("compare_runs: no traces");
  if (names.size() != traces.size())
    throw std::invalid_argument("compare_runs: one name per trace required");

  std::vector<CompareRow> rows(traces.size());
  double min_plateau = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    rows[i].name = names[i];
    rows[i].plateau = plateau(*traces[i]);
    min_plateau = std::min(min_plateau, rows[i].plateau);
  }
  if (target <= 0.0) target = 1.5 * min_plateau;
  for (std::size_t i = 0; i < traces.size(); ++i)
    rows[i].rounds_to_target = rounds_to_target(*traces[i], target);
  return rows;
}

// ---- emission --------------------------------------------------------------------

void emit_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << kTraceHeader << '\n';
  char line[512];
  for (const TraceRow& r : trace.rows) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g", r.round,
                  r.loss_gap, r.grad_norm, r.dist_to_opt, r.oracle_err_sq, r.lemma1_bound,
                  r.inner_iters, r.wall_ms);
    out << line << '\n';
  }
  if (!out.good()) throw std::runtime_error("emit_csv: write failed: " + path);
}

RunTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader)
    throw std::runtime_error(path + ": unexpected header \"" + line + "\"");

  RunTrace trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 8)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 8 fields");
    try {
      TraceRow row;
      row.round = std::stoi(fields[0]);
      row.loss_gap = std::stod(fields[1]);
      row.grad_norm = std::stod(fields[2]);
      row.dist_to_opt = std::stod(fields[3]);
      row.oracle_err_sq = std::stod(fields[4]);
      row.lemma1_bound = std::stod(fields[5]);
      row.inner_iters = std::stoi(fields[6]);
      row.wall_ms = std::stod(fields[7]);
      trace.rows.push_back(row);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return trace;
}

namespace {

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void emit_plot(const std::vector<std::pair<std::string, RunTrace>>& traces,
               const std::string& path) {
  // Plot geometry.
  const double width = 880.0, height = 520.0;
  const double left = 80.0, right = width - 190.0, top = 30.0, bottom = height - 55.0;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  const int palette_size = 6;

  // Data ranges: x spans rounds, y spans positive loss gaps in log10.
  int max_round = 1;
  double gap_min = std::numeric_limits<double>::infinity(), gap_max = 0.0;
  for (const auto& [name, trace] : traces) {
    for (const TraceRow& row : trace.rows) {
      max_round = std::max(max_round, row.round);
      if (row.loss_gap > 0.0) {
        gap_min = std::min(gap_min, row.loss_gap);
        gap_max = std::max(gap_max, row.loss_gap);
      }
    }
  }
  double lo = -1.0, hi = 1.0;  // default decades when no positive gap exists
  if (gap_max > 0.0) {
    lo = std::floor(std::log10(gap_min));
    hi = std::ceil(std::log10(gap_max));
    if (hi <= lo) hi = lo + 1.0;
  }

  const auto sx = [&](double round) {
    return left + (right - left) * (round / static_cast<double>(max_round));
  };
  const auto sy = [&](double gap) {
    return bottom - (bottom - top) * ((std::log10(gap) - lo) / (hi - lo));
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot: cannot open " + path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n"
      << "<rect width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"#ffffff\"/>\n";

  // Frame and y-axis decade grid.
  out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\""
      << num(right - left) << "\" height=\"" << num(bottom - top)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  const int decades = static_cast<int>(hi - lo);
  const int y_step = std::max(1, (decades + 7) / 8);
  for (int k = 0; k <= decades; k += y_step) {
    const double value = std::pow(10.0, lo + k);
    const double y = sy(value);
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(right)
        << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    char label[64];
    std::snprintf(label, sizeof label, "%.0e", value);
    out << "<text x=\"" << num(left - 8.0) << "\" y=\"" << num(y + 4.0)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << label
        << "</text>\n";
  }

  // x ticks at a round step of 1/2/5 x 10^k.
  double x_step = 1.0;
  while (max_round / x_step > 6.0) {
    if (max_round / (2.0 * x_step) <= 6.0) {
      x_step *= 2.0;
    } else if (max_round / (5.0 * x_step) <= 6.0) {
      x_step *= 5.0;
    } else {
      x_step *= 10.0;
    }
  }
  for (double r = 0.0; r <= max_round + 1e-9; r += x_step) {
    const double x = sx(r);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(bottom + 5.0) << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << num(x) << "\" y=\"" << num(bottom + 20.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << num(r) << "</text>\n";
  }
  out << "<text x=\"" << num((left + right) / 2.0) << "\" y=\"" << num(height - 12.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">round</text>\n"
      << "<text x=\"18\" y=\"" << num((top + bottom) / 2.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 "
      << num((top + bottom) / 2.0) << ")\">loss gap</text>\n";

  // One polyline per trace (positive gaps only; log scale).
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const char* color = kPalette[t % palette_size];
    std::string points;
    for (const TraceRow& row : traces[t].second.rows) {
      if (row.loss_gap <= 0.0) continue;
      points += num(sx(row.round));
      points += ',';
      points += num(sy(row.loss_gap));
      points += ' ';
    }
    if (!points.empty())
      out << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.8\" points=\"" << points << "\"/>\n";
    const double ly = top + 18.0 + 22.0 * static_cast<double>(t);
    out << "<line x1=\"" << num(right + 12.0) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(right + 40.0) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"3\"/>\n"
        << "<text x=\"" << num(right + 46.0) << "\" y=\"" << num(ly + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(traces[t].first)
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out.good()) throw std::runtime_error("emit_plot: write failed: " + path);
}

}  // namespace byzsim
