// Copyright 2026 The strfkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "strfkit/taskdist.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

#include "strfkit/error.hpp"
#include "strfkit/parallel.hpp"

namespace strfkit {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double top = v.maxCoeff();
  if (top == kNegInf) return kNegInf;
  return top + std::log((v.array() - top).exp().sum());
}

Eigen::VectorXd log_weights(std::span<const double> w) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) out[static_cast<Eigen::Index>(i)] = w[i] > 0.0 ? std::log(w[i]) : kNegInf;
  return out;
}

void check_weights(std::span<const double> w, const char* which) {
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(which) + " weights must be nonnegative");
    sum += v;
  }
  if (w.empty() || std::abs(sum - 1.0) > 1e-12) throw InvalidInput(std::string(which) + " weights must sum to 1");
}

struct Duals {
  Eigen::VectorXd f, g;
};

// Plan entries exp((f_i + g_j - M_ij) / lambda).
Eigen::MatrixXd plan_of(const Eigen::MatrixXd& m, const Duals& d, double lambda) {
  Eigen::MatrixXd p(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double e = d.f[i] + d.g[j];
      p(i, j) = e == kNegInf ? 0.0 : std::exp((e - m(i, j)) / lambda);
    }
  return p;
}

double marginal_error(const Eigen::MatrixXd& p, std::span<const double> w_a, std::span<const double> w_b) {
  double err = 0.0;
  const Eigen::VectorXd rows = p.rowwise().sum();
  const Eigen::VectorXd cols = p.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < rows.size(); ++i) err = std::max(err, std::abs(rows[i] - w_a[static_cast<std::size_t>(i)]));
  for (Eigen::Index j = 0; j < cols.size(); ++j) err = std::max(err, std::abs(cols[j] - w_b[static_cast<std::size_t>(j)]));
  return err;
}

// Alternating dual updates at one lambda until the row marginals (columns
// are exact after each g update) fall below tol or the budget runs out.
// Returns iterations used and the last error.
std::pair<int, double> run_stage(const Eigen::MatrixXd& m, const Eigen::VectorXd& log_a, const Eigen::VectorXd& log_b,
                                 std::span<const double> w_a, double lambda, double tol, int budget, Duals& d) {
  const Eigen::Index na = m.rows(), nb = m.cols();
  Eigen::VectorXd scratch_a(nb), scratch_b(na);
  double err = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < budget) {
    ++it;
    for (Eigen::Index i = 0; i < na; ++i) {
      if (log_a[i] == kNegInf) {
        d.f[i] = kNegInf;
        continue;
      }
      for (Eigen::Index j = 0; j < nb; ++j) scratch_a[j] = (d.g[j] - m(i, j)) / lambda;
      d.f[i] = lambda * (log_a[i] - log_sum_exp(scratch_a));
    }
    for (Eigen::Index j = 0; j < nb; ++j) {
      if (log_b[j] == kNegInf) {
        d.g[j] = kNegInf;
        continue;
      }
      for (Eigen::Index i = 0; i < na; ++i) scratch_b[i] = (d.f[i] - m(i, j)) / lambda;
      d.g[j] = lambda * (log_b[j] - log_sum_exp(scratch_b));
    }
    err = 0.0;
    for (Eigen::Index i = 0; i < na; ++i) {
      if (log_a[i] == kNegInf) continue;
      for (Eigen::Index j = 0; j < nb; ++j) scratch_a[j] = (d.f[i] + d.g[j] - m(i, j)) / lambda;
      err = std::max(err, std::abs(std::exp(log_sum_exp(scratch_a)) - w_a[static_cast<std::size_t>(i)]));
    }
    if (err < tol) break;
  }
  return {it, err};
}

// Damped Newton ascent on the dual objective
//   sum a_i f_i + sum b_j g_j - lambda sum_ij exp((f_i + g_j - M_ij) / lambda)
// over the rows and columns with positive weight, with the last column
// potential pinned (the objective is invariant to f + c, g - c). A
// Levenberg shift is raised whenever the Armijo search fails.
// Returns (steps taken, converged).
std::pair<int, bool> newton_polish(const Eigen::MatrixXd& m, std::span<const double> w_a, std::span<const double> w_b,
                                   double lambda, double tol, int budget, Duals& d) {
  std::vector<Eigen::Index> rows, cols;
  for (std::size_t i = 0; i < w_a.size(); ++i)
    if (w_a[i] > 0.0) rows.push_back(static_cast<Eigen::Index>(i));
  for (std::size_t j = 0; j < w_b.size(); ++j)
    if (w_b[j] > 0.0) cols.push_back(static_cast<Eigen::Index>(j));
  const auto na = static_cast<Eigen::Index>(rows.size()), nb = static_cast<Eigen::Index>(cols.size());
  const Eigen::Index dim = na + nb - 1;

  Eigen::MatrixXd mm(na, nb);
  Eigen::VectorXd a(na), b(nb), f(na), g(nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    a[i] = w_a[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
    f[i] = d.f[rows[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < nb; ++j) mm(i, j) = m(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  }
  for (Eigen::Index j = 0; j < nb; ++j) {
    b[j] = w_b[static_cast<std::size_t>(cols[static_cast<std::size_t>(j)])];
    g[j] = d.g[cols[static_cast<std::size_t>(j)]];
  }

  // nullopt when an exponent overflows
  auto plan = [&](const Eigen::VectorXd& ff, const Eigen::VectorXd& gg) -> std::optional<Eigen::MatrixXd> {
    Eigen::MatrixXd p(na, nb);
    for (Eigen::Index j = 0; j < nb; ++j)
      for (Eigen::Index i = 0; i < na; ++i) {
        const double z = (ff[i] + gg[j] - mm(i, j)) / lambda;
        if (z > 700.0) return std::nullopt;
        p(i, j) = std::exp(z);
      }
    return p;
  };

  auto p0 = plan(f, g);
  if (!p0) return {0, false};
  Eigen::MatrixXd p = *p0;
  double mu = 0.0;
  int steps = 0;
  bool converged = false;
  while (steps < budget) {
    const Eigen::VectorXd r = p.rowwise().sum();
    const Eigen::VectorXd c = p.colwise().sum().transpose();
    if (std::max((r - a).cwiseAbs().maxCoeff(), (c - b).cwiseAbs().maxCoeff()) < tol) {
      converged = true;
      break;
    }
    ++steps;
    Eigen::VectorXd grad(dim);
    grad << a - r, (b - c).head(nb - 1);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
    k.topLeftCorner(na, na).diagonal() = r;
    k.topRightCorner(na, nb - 1) = p.leftCols(nb - 1);
    k.bottomLeftCorner(nb - 1, na) = p.leftCols(nb - 1).transpose();
    k.bottomRightCorner(nb - 1, nb - 1).diagonal() = c.head(nb - 1);

    bool accepted = false;
    double t = 1.0;
    Eigen::VectorXd df, dg;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      Eigen::MatrixXd shifted = k;
      shifted.diagonal().array() += mu;
      const Eigen::VectorXd step = lambda * shifted.ldlt().solve(grad);
      const double slope = grad.dot(step);
      if (step.allFinite() && slope > 0.0) {
        for (t = 1.0; t >= 1.0 / 64.0; t *= 0.5) {
          df = t * step.head(na);
          dg = Eigen::VectorXd::Zero(nb);
          dg.head(nb - 1) = t * step.tail(nb - 1);
          const auto pn = plan(f + df, g + dg);
          if (!pn) continue;
          const double gain = a.dot(df) + b.dot(dg) - lambda * (*pn - p).sum();
          if (gain >= 1e-4 * t * slope) {
            p = *pn;
            accepted = true;
            break;
          }
        }
      }
      if (!accepted) mu = std::max(mu * 10.0, 1e-12 * k.diagonal().maxCoeff());
    }
    if (!accepted) break;
    if (t == 1.0) mu /= 10.0;
    f += df;
    g += dg;
  }

  for (Eigen::Index i = 0; i < na; ++i) d.f[rows[static_cast<std::size_t>(i)]] = f[i];
  for (Eigen::Index j = 0; j < nb; ++j) d.g[cols[static_cast<std::size_t>(j)]] = g[j];
  return {steps, converged};
}

}  // namespace

void TaskPopulation::validate() const {
  if (points.empty()) throw InvalidInput("population '" + task_name + "' is empty");
  if (!weights.empty()) {
    if (weights.size() != points.size()) throw InvalidInput("population '" + task_name + "': weight count mismatch");
    check_weights(weights, task_name.c_str());
  }
}

std::vector<double> TaskPopulation::resolved_weights() const {
  validate();
  if (!weights.empty()) return weights;
  return std::vector<double>(points.size(), 1.0 / static_cast<double>(points.size()));
}

Coordinates coordinates(const ModulationPoint& p) { return {p.sigma_t_s, p.sigma_f_oct, p.omega, p.Omega}; }

bool Normalization::any_degenerate() const {
  return std::any_of(degenerate_axis.begin(), degenerate_axis.end(), [](bool b) { return b; });
}

Normalization normalize_populations(std::span<const TaskPopulation> pops) {
  if (pops.empty()) throw InvalidInput("no populations to normalize");
  Normalization out;
  std::size_t count = 0;
  for (const auto& pop : pops) {
    pop.validate();
    for (const auto& p : pop.points) {
      const auto c = coordinates(p);
      for (std::size_t a = 0; a < 4; ++a) out.mean[a] += c[a];
      ++count;
    }
  }
  for (double& m : out.mean) m /= static_cast<double>(count);
  for (const auto& pop : pops)
    for (const auto& p : pop.points) {
      const auto c = coordinates(p);
      for (std::size_t a = 0; a < 4; ++a) out.stddev[a] += (c[a] - out.mean[a]) * (c[a] - out.mean[a]);
    }
  for (std::size_t a = 0; a < 4; ++a) {
    out.stddev[a] = std::sqrt(out.stddev[a] / static_cast<double>(count));
    out.degenerate_axis[a] = !(out.stddev[a] > 0.0);
  }

  for (const auto& pop : pops) {
    TaskPopulation z = pop;
    for (auto& p : z.points) {
      auto c = coordinates(p);
      for (std::size_t a = 0; a < 4; ++a) {
        c[a] -= out.mean[a];
        if (!out.degenerate_axis[a]) c[a] /= out.stddev[a];
      }
      p = {.omega = c[2], .Omega = c[3], .sigma_t_s = c[0], .sigma_f_oct = c[1]};
    }
    out.populations.push_back(std::move(z));
  }
  return out;
}

Eigen::MatrixXd cost_matrix(const TaskPopulation& a, const TaskPopulation& b) {
  a.validate();
  b.validate();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.points.size()), static_cast<Eigen::Index>(b.points.size()));
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto ca = coordinates(a.points[i]);
    for (std::size_t j = 0; j < b.points.size(); ++j) {
      const auto cb = coordinates(b.points[j]);
      double ss = 0.0;
      for (std::size_t k = 0; k < 4; ++k) ss += (ca[k] - cb[k]) * (ca[k] - cb[k]);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::sqrt(ss);
    }
  }
  return m;
}

TransportResult sinkhorn(const Eigen::MatrixXd& cost, std::span<const double> w_a, std::span<const double> w_b,
                         const SinkhornConfig& cfg) {
  if (cost.rows() != static_cast<Eigen::Index>(w_a.size()) || cost.cols() != static_cast<Eigen::Index>(w_b.size()))
    throw InvalidInput("cost matrix does not match the weight vectors");
  if (cost.size() == 0 || !cost.allFinite() || cost.minCoeff() < 0.0)
    throw InvalidInput("cost matrix must be finite and nonnegative");
  check_weights(w_a, "source");
  check_weights(w_b, "target");
  if (!(cfg.reg_lambda > 0.0)) throw InvalidConfig("reg_lambda must be positive");
  if (cfg.max_iter <= 0 || !(cfg.tol > 0.0)) throw InvalidConfig("max_iter and tol must be positive");

  const Eigen::VectorXd log_a = log_weights(w_a), log_b = log_weights(w_b);
  Duals d{Eigen::VectorXd::Zero(cost.rows()), Eigen::VectorXd::Zero(cost.cols())};

  TransportResult r;
  r.cost = cost;
  r.reg_lambda = cfg.reg_lambda;
  int used = 0;
  double lambda = std::max(cost.maxCoeff(), cfg.reg_lambda);
  while (lambda > cfg.reg_lambda && used < cfg.max_iter) {
    used += run_stage(cost, log_a, log_b, w_a, lambda, 1e-6, std::min(200, cfg.max_iter - used), d).first;
    lambda = std::max(lambda * 0.5, cfg.reg_lambda);
  }
  // Plain iterations converge slowly at small lambda, so a short Sinkhorn
  // run hands over to Newton, and Sinkhorn resumes if Newton stalls.
  auto [it, err] = run_stage(cost, log_a, log_b, w_a, cfg.reg_lambda, cfg.tol,
                             std::clamp(cfg.max_iter - used, 1, 100), d);
  used += it;
  bool converged = err < cfg.tol;
  if (!converged && used < cfg.max_iter) {
    const Duals before = d;
    const auto [steps, ok] = newton_polish(cost, w_a, w_b, cfg.reg_lambda, cfg.tol, cfg.max_iter - used, d);
    used += steps;
    converged = ok;
    if (!ok) {
      d = before;
      if (used < cfg.max_iter) {
        std::tie(it, err) = run_stage(cost, log_a, log_b, w_a, cfg.reg_lambda, cfg.tol, cfg.max_iter - used, d);
        used += it;
        converged = err < cfg.tol;
      }
    }
  }
  r.iterations_used = used;
  r.plan = plan_of(cost, d, cfg.reg_lambda);
  r.marginal_error = marginal_error(r.plan, w_a, w_b);
  if (converged && !(r.marginal_error < cfg.tol)) converged = false;
  if (!converged)
    r.warning = ConvergenceWarning{"Sinkhorn stopped at max_iter before reaching tol", r.marginal_error};

  r.distance = (r.plan.array() * cost.array()).sum();
  for (Eigen::Index i = 0; i < r.plan.size(); ++i)
    if (r.plan(i) > 0.0) r.entropy -= r.plan(i) * std::log(r.plan(i));
  r.regularized = r.distance - cfg.reg_lambda * r.entropy;
  return r;
}

PairwiseDistances pairwise_distances(std::span<const TaskPopulation> pops, const SinkhornConfig& cfg) {
  if (pops.size() < 2) throw InvalidInput("need at least two populations");
  const auto n = static_cast<Eigen::Index>(pops.size());
  PairwiseDistances out;
  for (const auto& p : pops) out.names.push_back(p.task_name);
  out.distance = Eigen::MatrixXd::Zero(n, n);
  out.regularized = Eigen::MatrixXd::Zero(n, n);
  out.self_distance.assign(pops.size(), 0.0);

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < pops.size(); ++i)
    for (std::size_t j = i; j < pops.size(); ++j) cells.emplace_back(i, j);
  std::vector<TransportResult> results(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto [i, j] = cells[c];
    const auto wa = pops[i].resolved_weights(), wb = pops[j].resolved_weights();
    results[c] = sinkhorn(cost_matrix(pops[i], pops[j]), wa, wb, cfg);
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto [i, j] = cells[c];
    const auto& r = results[c];
    if (r.warning) out.warnings.push_back({static_cast<int>(i), static_cast<int>(j), *r.warning});
    if (i == j) {
      out.self_distance[i] = r.distance;
      continue;
    }
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    out.distance(a, b) = out.distance(b, a) = r.distance;
    out.regularized(a, b) = out.regularized(b, a) = r.regularized;
  }
  return out;
}

std::vector<std::string> DendrogramNode::leaves() const {
  if (is_leaf()) return {name};
  std::vector<std::string> out;
  for (const auto& c : children) {
    auto sub = c.leaves();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

Dendrogram linkage(const Eigen::MatrixXd& distance, const std::vector<std::string>& names) {
  const auto n = static_cast<Eigen::Index>(names.size());
  if (n < 2) throw InvalidInput("linkage needs at least two tasks");
  if (distance.rows() != n || distance.cols() != n) throw InvalidInput("distance matrix does not match the names");
  if (!distance.allFinite()) throw InvalidInput("distance matrix has non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(distance(i, j) - distance(j, i)) > 1e-9) throw InvalidInput("distance matrix is not symmetric");

  struct Cluster {
    int id;
    std::vector<Eigen::Index> members;
    DendrogramNode node;
  };
  std::vector<Cluster> active;
  for (Eigen::Index i = 0; i < n; ++i)
    active.push_back({static_cast<int>(i), {i}, DendrogramNode{names[static_cast<std::size_t>(i)], 0.0, {}}});

  auto average = [&](const Cluster& a, const Cluster& b) {
    double s = 0.0;
    for (auto i : a.members)
      for (auto j : b.members) s += distance(i, j);
    return s / static_cast<double>(a.members.size() * b.members.size());
  };

  Dendrogram out;
  int next_id = static_cast<int>(n);
  while (active.size() > 1) {
    // active stays sorted by id, so scanning i < j visits pairs in
    // lexicographic id order and the first strict minimum wins ties
    std::size_t best_i = 0, best_j = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double d = average(active[i], active[j]);
        if (d < best) {
          best = d;
          best_i = i;
          best_j = j;
        }
      }
    Cluster merged{next_id++, active[best_i].members, DendrogramNode{"", best, {}}};
    merged.members.insert(merged.members.end(), active[best_j].members.begin(), active[best_j].members.end());
    merged.node.children = {std::move(active[best_i].node), std::move(active[best_j].node)};
    out.merges.push_back({active[best_i].id, active[best_j].id, best});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_j));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_i));
    active.push_back(std::move(merged));
  }
  out.root = std::move(active.front().node);
  return out;
}

}  // namespace strfkit
