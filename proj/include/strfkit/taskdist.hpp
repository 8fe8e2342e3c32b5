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

// Entropic optimal-transport distances between filter populations and an
// average-linkage cluster tree over them.

#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strfkit/gaborkit.hpp"

namespace strfkit {

struct TaskPopulation {
  std::string task_name;
  std::vector<ModulationPoint> points;
  std::vector<double> weights;  // empty means uniform 1/n

  // Throws InvalidInput on an empty population, a size mismatch, negative
  // weights or weights not summing to 1 within 1e-12.
  void validate() const;
  std::vector<double> resolved_weights() const;
};

// Coordinates are (sigma_t_s, sigma_f_oct, omega, Omega) in that order.
using Coordinates = std::array<double, 4>;
Coordinates coordinates(const ModulationPoint& p);

struct Normalization {
  std::vector<TaskPopulation> populations;  // z-scored copies
  Coordinates mean{};
  Coordinates stddev{};  // population standard deviation over the union
  // Axes with zero pooled variance are centered but not scaled.
  std::array<bool, 4> degenerate_axis{};
  bool any_degenerate() const;
};

// z-scores every coordinate with moments pooled over all points of all
// populations (each point counted once, regardless of weights).
Normalization normalize_populations(std::span<const TaskPopulation> pops);

// Euclidean distances between coordinate 4-vectors.
Eigen::MatrixXd cost_matrix(const TaskPopulation& a, const TaskPopulation& b);

struct SinkhornConfig {
  double reg_lambda = 1e-3;
  int max_iter = 10000;
  double tol = 1e-9;
};

struct ConvergenceWarning {
  std::string message;
  double marginal_error = 0.0;
};

struct TransportResult {
  Eigen::MatrixXd cost;  // M
  Eigen::MatrixXd plan;  // P
  double distance = 0.0;     // <P, M>
  double entropy = 0.0;      // h(P) = -sum P log P
  double regularized = 0.0;  // <P, M> - lambda h(P)
  double reg_lambda = 0.0;
  int iterations_used = 0;
  double marginal_error = 0.0;  // max violation over rows and columns
  std::optional<ConvergenceWarning> warning;
};

// Log-domain Sinkhorn iterations with the regularization annealed
// geometrically from max(M) down to reg_lambda, warm-starting the dual
// potentials at each stage, then damped Newton steps on the dual at
// reg_lambda. iterations_used counts Sinkhorn sweeps and Newton steps.
// Converged means the max marginal violation is below tol; otherwise the
// result carries a ConvergenceWarning.
TransportResult sinkhorn(const Eigen::MatrixXd& cost, std::span<const double> w_a, std::span<const double> w_b,
                         const SinkhornConfig& cfg = {});

struct PairwiseDistances {
  std::vector<std::string> names;
  Eigen::MatrixXd distance;     // symmetric, zero diagonal
  Eigen::MatrixXd regularized;  // same layout, <P, M> - lambda h(P)
  std::vector<double> self_distance;  // solved d(a, a) per population
  struct CellWarning {
    int i = 0;
    int j = 0;
    ConvergenceWarning warning;
  };
  std::vector<CellWarning> warnings;
};

// Solves the upper triangle (and each self pair) in parallel and mirrors.
// Inputs must already share a normalization frame.
PairwiseDistances pairwise_distances(std::span<const TaskPopulation> pops, const SinkhornConfig& cfg = {});

struct DendrogramNode {
  std::string name;  // leaf name; empty for internal nodes
  double merge_height = 0.0;
  std::vector<DendrogramNode> children;  // empty or two

  bool is_leaf() const { return children.empty(); }
  std::vector<std::string> leaves() const;
};

// One agglomeration step. Cluster ids: leaves 0..n-1 in input order, then
// n, n+1, ... for merged clusters in creation order.
struct Merge {
  int left = 0;
  int right = 0;
  double height = 0.0;
};

struct Dendrogram {
  DendrogramNode root;
  std::vector<Merge> merges;
};

// Average linkage. The closest pair of active clusters merges first; ties go
// to the lexicographically smallest (id, id) pair. Throws InvalidInput for
// fewer than two names, a non-square or asymmetric matrix (beyond 1e-9), or
// a name count mismatch.
Dendrogram linkage(const Eigen::MatrixXd& distance, const std::vector<std::string>& names);

}  // namespace strfkit
