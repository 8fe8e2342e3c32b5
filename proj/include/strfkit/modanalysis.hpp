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

// Descriptors of a filter population in the (omega, Omega) modulation plane.
// Points are expected canonical (Omega >= 0), omega in Hz, Omega in
// cycles/octave.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strfkit/gaborkit.hpp"

namespace strfkit {

struct LowBox {
  double delta_t = 16.0;   // Hz
  double delta_f = 0.08;   // cycles/octave

  // Throws InvalidConfig unless both are positive and finite.
  void validate() const;
};

struct Asymmetry {
  double fraction = 0.0;  // share of points with omega > 0
  double centered = 0.0;  // 2 * fraction - 1
};

// Membership counts with strict inequalities: n_dt counts |omega| < delta_t,
// n_df counts Omega < delta_f, n_low counts both.
struct BoxCounts {
  int n = 0;
  int n_low = 0;
  int n_dt = 0;
  int n_df = 0;
};

Asymmetry alpha_asymmetry(std::span<const ModulationPoint> points);
BoxCounts box_counts(std::span<const ModulationPoint> points, const LowBox& box = {});
double alpha_low(std::span<const ModulationPoint> points, const LowBox& box = {});
// (n_dt + n_df - 2 n_low) / (n - n_low). DegenerateDistribution when every
// point sits in the low box.
double alpha_star(std::span<const ModulationPoint> points, const LowBox& box = {});

// values(i, j) is the density at (omega_axis[j], Omega_axis[i]).
struct DensityGrid {
  Eigen::MatrixXd values;
  std::vector<double> omega_axis;  // Hz, -omega_max .. omega_max
  std::vector<double> Omega_axis;  // cycles/octave, 0 .. Omega_max
  double bandwidth_omega = 0.0;
  double bandwidth_Omega = 0.0;
};

// Gaussian KDE on an inclusive lattice over [-omega_max, omega_max] x
// [0, Omega_max], normalized to sum 1. Bandwidth per axis by Scott's rule,
// h = std * n^(-1/6); an axis with zero spread uses the lattice spacing.
// Throws DegenerateDistribution when all points coincide (or there are
// fewer than two).
DensityGrid kde_density(std::span<const ModulationPoint> points, double omega_max, double Omega_max,
                        int n_omega = 64, int n_Omega = 64);
// Nyquist bounds: frame_rate / 2 Hz and channels_per_octave / 2 c/o.
DensityGrid kde_density(std::span<const ModulationPoint> points, const ConversionRates& rates, int resolution = 64);

// Leading singular value over the sum of all singular values.
// Throws DegenerateDistribution for a zero or empty matrix.
std::vector<double> singular_values(const Eigen::MatrixXd& m);
double alpha_separability(const Eigen::MatrixXd& density);

struct Interval {
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
  int n_valid = 0;  // replicates for which the statistic was defined
};

using Statistic = std::function<double(std::span<const ModulationPoint>)>;

// Percentile bootstrap (2.5 / 97.5, linear interpolation between order
// statistics). Replicate r resamples with its own generator seeded from
// (seed, r); replicates run in parallel. Replicates on which the statistic
// throws DegenerateDistribution are skipped. Throws InvalidInput on an
// empty population, and DegenerateDistribution if no replicate is defined.
Interval bootstrap_ci(std::span<const ModulationPoint> points, const Statistic& statistic, int n_boot = 100,
                      std::uint64_t seed = 0);

struct AnalysisConfig {
  LowBox box;
  int n_boot = 100;
  std::uint64_t seed = 0;
  int resolution = 64;
};

struct PopulationStats {
  BoxCounts counts;
  LowBox box;
  Asymmetry asymmetry;
  Interval alpha_asymmetry;
  Interval alpha_asymmetry_centered;
  Interval alpha_low;
  std::optional<Interval> alpha_star;  // empty when undefined
  std::string alpha_star_reason;
  std::optional<Interval> alpha_sep;
  std::string alpha_sep_reason;
  std::optional<DensityGrid> density;
};

// All descriptors with bootstrap intervals. Undefined descriptors are left
// empty with a reason instead of throwing.
PopulationStats analyze_population(std::span<const ModulationPoint> points, const ConversionRates& rates,
                                   const AnalysisConfig& cfg = {});

}  // namespace strfkit
