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

#include "strfkit/modanalysis.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

#include "strfkit/error.hpp"
#include "strfkit/parallel.hpp"

namespace strfkit {
namespace {

void require_points(std::span<const ModulationPoint> points) {
  if (points.empty()) throw InvalidInput("empty filter population");
}

double sample_std(std::span<const ModulationPoint> points, double ModulationPoint::*axis) {
  double mean = 0.0;
  for (const auto& p : points) mean += p.*axis;
  mean /= static_cast<double>(points.size());
  double ss = 0.0;
  for (const auto& p : points) ss += (p.*axis - mean) * (p.*axis - mean);
  return std::sqrt(ss / static_cast<double>(points.size() - 1));
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

void LowBox::validate() const {
  if (!(delta_t > 0.0) || !std::isfinite(delta_t)) throw InvalidConfig("delta_t must be positive");
  if (!(delta_f > 0.0) || !std::isfinite(delta_f)) throw InvalidConfig("delta_f must be positive");
}

Asymmetry alpha_asymmetry(std::span<const ModulationPoint> points) {
  require_points(points);
  const auto up = std::count_if(points.begin(), points.end(), [](const auto& p) { return p.omega > 0.0; });
  const double fraction = static_cast<double>(up) / static_cast<double>(points.size());
  return {fraction, 2.0 * fraction - 1.0};
}

BoxCounts box_counts(std::span<const ModulationPoint> points, const LowBox& box) {
  box.validate();
  BoxCounts c;
  c.n = static_cast<int>(points.size());
  for (const auto& p : points) {
    const bool dt = std::abs(p.omega) < box.delta_t;
    const bool df = p.Omega < box.delta_f;
    c.n_dt += dt;
    c.n_df += df;
    c.n_low += dt && df;
  }
  return c;
}

double alpha_low(std::span<const ModulationPoint> points, const LowBox& box) {
  require_points(points);
  const auto c = box_counts(points, box);
  return static_cast<double>(c.n_low) / c.n;
}

double alpha_star(std::span<const ModulationPoint> points, const LowBox& box) {
  require_points(points);
  const auto c = box_counts(points, box);
  if (c.n == c.n_low) throw DegenerateDistribution("alpha_star undefined: every filter lies in the low box");
  return static_cast<double>(c.n_dt + c.n_df - 2 * c.n_low) / static_cast<double>(c.n - c.n_low);
}

DensityGrid kde_density(std::span<const ModulationPoint> points, double omega_max, double Omega_max, int n_omega,
                        int n_Omega) {
  if (!(omega_max > 0.0) || !(Omega_max > 0.0) || n_omega < 2 || n_Omega < 2)
    throw InvalidConfig("density lattice needs positive bounds and at least 2 cells per axis");
  const bool distinct = points.size() >= 2 && std::any_of(points.begin(), points.end(), [&](const auto& p) {
                          return p.omega != points[0].omega || p.Omega != points[0].Omega;
                        });
  if (!distinct) throw DegenerateDistribution("density needs at least two distinct points");

  DensityGrid d;
  d.omega_axis = linspace(-omega_max, omega_max, n_omega);
  d.Omega_axis = linspace(0.0, Omega_max, n_Omega);
  const double scott = std::pow(static_cast<double>(points.size()), -1.0 / 6.0);
  d.bandwidth_omega = sample_std(points, &ModulationPoint::omega) * scott;
  d.bandwidth_Omega = sample_std(points, &ModulationPoint::Omega) * scott;
  if (d.bandwidth_omega == 0.0) d.bandwidth_omega = 2.0 * omega_max / (n_omega - 1);
  if (d.bandwidth_Omega == 0.0) d.bandwidth_Omega = Omega_max / (n_Omega - 1);

  // Each point contributes an outer product of two 1-D Gaussians.
  d.values = Eigen::MatrixXd::Zero(n_Omega, n_omega);
  Eigen::VectorXd gw(n_omega), gW(n_Omega);
  for (const auto& p : points) {
    for (int j = 0; j < n_omega; ++j) {
      const double u = (d.omega_axis[static_cast<std::size_t>(j)] - p.omega) / d.bandwidth_omega;
      gw[j] = std::exp(-0.5 * u * u);
    }
    for (int i = 0; i < n_Omega; ++i) {
      const double u = (d.Omega_axis[static_cast<std::size_t>(i)] - p.Omega) / d.bandwidth_Omega;
      gW[i] = std::exp(-0.5 * u * u);
    }
    d.values += gW * gw.transpose();
  }
  const double total = d.values.sum();
  if (!(total > 0.0)) throw DegenerateDistribution("density has no mass on the lattice");
  d.values /= total;
  return d;
}

DensityGrid kde_density(std::span<const ModulationPoint> points, const ConversionRates& rates, int resolution) {
  rates.validate();
  return kde_density(points, rates.frame_rate / 2.0, rates.channels_per_octave / 2.0, resolution, resolution);
}

std::vector<double> singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) throw DegenerateDistribution("empty density matrix");
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  return {s.data(), s.data() + s.size()};
}

double alpha_separability(const Eigen::MatrixXd& density) {
  const auto s = singular_values(density);
  double total = 0.0;
  for (double v : s) total += v;
  if (!(total > 0.0)) throw DegenerateDistribution("zero density matrix");
  return s.front() / total;
}

Interval bootstrap_ci(std::span<const ModulationPoint> points, const Statistic& statistic, int n_boot,
                      std::uint64_t seed) {
  require_points(points);
  if (n_boot <= 0) throw InvalidConfig("n_boot must be positive");
  Interval out;
  out.estimate = statistic(points);

  std::vector<std::optional<double>> reps(static_cast<std::size_t>(n_boot));
  parallel_for(reps.size(), [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::vector<ModulationPoint> sample(points.size());
    for (auto& s : sample) s = points[pick(rng)];
    try {
      reps[r] = statistic(sample);
    } catch (const DegenerateDistribution&) {
      reps[r].reset();
    }
  });

  std::vector<double> values;
  for (const auto& v : reps)
    if (v) values.push_back(*v);
  if (values.empty()) throw DegenerateDistribution("statistic undefined on every bootstrap replicate");
  out.n_valid = static_cast<int>(values.size());
  out.low = percentile(values, 0.025);
  out.high = percentile(values, 0.975);
  return out;
}

PopulationStats analyze_population(std::span<const ModulationPoint> points, const ConversionRates& rates,
                                   const AnalysisConfig& cfg) {
  require_points(points);
  cfg.box.validate();
  rates.validate();

  PopulationStats s;
  s.box = cfg.box;
  s.counts = box_counts(points, cfg.box);
  s.asymmetry = alpha_asymmetry(points);
  s.alpha_asymmetry = bootstrap_ci(
      points, [](auto p) { return alpha_asymmetry(p).fraction; }, cfg.n_boot, cfg.seed);
  s.alpha_asymmetry_centered = bootstrap_ci(
      points, [](auto p) { return alpha_asymmetry(p).centered; }, cfg.n_boot, cfg.seed);
  s.alpha_low = bootstrap_ci(
      points, [&](auto p) { return alpha_low(p, cfg.box); }, cfg.n_boot, cfg.seed);
  try {
    s.alpha_star = bootstrap_ci(
        points, [&](auto p) { return alpha_star(p, cfg.box); }, cfg.n_boot, cfg.seed);
  } catch (const DegenerateDistribution& e) {
    s.alpha_star_reason = e.what();
  }
  try {
    s.density = kde_density(points, rates, cfg.resolution);
    s.alpha_sep = bootstrap_ci(
        points, [&](auto p) { return alpha_separability(kde_density(p, rates, cfg.resolution).values); },
        cfg.n_boot, cfg.seed);
  } catch (const DegenerateDistribution& e) {
    s.alpha_sep_reason = e.what();
  }
  return s;
}

}  // namespace strfkit
