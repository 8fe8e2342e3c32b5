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

// Complex 2-D Gabor STRF kernels parameterized by envelope spreads
// (sigma_t, sigma_f) and a polar carrier (F, gamma):
//
//   g(t, f) = 1 / (2 pi sigma_t sigma_f) * exp(-(t^2/sigma_t^2 + f^2/sigma_f^2) / 2)
//             * exp(j 2 pi F (t cos gamma + f sin gamma))
//
// t and f are integer grid offsets (frames, mel channels) centered at zero.

#pragma once

#include <Eigen/Core>

#include <complex>
#include <numbers>
#include <vector>

namespace strfkit {

inline constexpr double kSigmaMin = 0.1;
// Per-axis Nyquist (0.5 cycles/unit) reachable at any orientation.
inline constexpr double kMaxModulation = 0.5 * std::numbers::sqrt2;

struct GaborParams {
  double sigma_t = 1.0;  // frames
  double sigma_f = 1.0;  // channels
  double F = 0.0;        // cycles per grid unit
  double gamma = 0.0;    // radians

  friend bool operator==(const GaborParams&, const GaborParams&) = default;
};

struct KernelGrid {
  int n_time = 111;
  int n_freq = 9;

  // Throws InvalidConfig unless both extents are odd and positive.
  void validate() const;
  int half_time() const { return n_time / 2; }
  int half_freq() const { return n_freq / 2; }
  std::vector<int> t_coords() const;
  std::vector<int> f_coords() const;
};

// values(i, j) holds g(t = j - half_time, f = i - half_freq).
struct ComplexKernel {
  Eigen::MatrixXcd values;

  int half_time() const { return static_cast<int>(values.cols()) / 2; }
  int half_freq() const { return static_cast<int>(values.rows()) / 2; }
  std::complex<double> at(int t, int f) const { return values(f + half_freq(), t + half_time()); }
};

struct KernelGradients {
  ComplexKernel d_sigma_t;
  ComplexKernel d_sigma_f;
  ComplexKernel d_F;
  ComplexKernel d_gamma;
};

// Grid-unit to physical-unit conversion for modulation coordinates.
struct ConversionRates {
  double frame_rate = 100.0;          // frames per second
  double channels_per_octave = 8.5;   // mel channels per octave

  void validate() const;
};

struct ModulationPoint {
  double omega = 0.0;        // temporal modulation, Hz
  double Omega = 0.0;        // spectral modulation, cycles/octave
  double sigma_t_s = 0.0;    // seconds
  double sigma_f_oct = 0.0;  // octaves

  friend bool operator==(const ModulationPoint&, const ModulationPoint&) = default;
};

// Spreads below kSigmaMin are clamped before evaluation.
ComplexKernel gabor_kernel(const GaborParams& p, const KernelGrid& g);

// Elementwise partials of gabor_kernel. A clamped spread has zero partial.
KernelGradients gabor_gradients(const GaborParams& p, const KernelGrid& g);

ModulationPoint to_cartesian(const GaborParams& p, const ConversionRates& rates);
// Inverse of to_cartesian.
GaborParams from_cartesian(const ModulationPoint& m, const ConversionRates& rates);

// Maps a point to the Omega >= 0 half-plane by flipping both modulation
// signs. Sign of omega then separates the two sweep orientations.
ModulationPoint canonicalize(const ModulationPoint& m);

std::vector<ModulationPoint> to_modulation_points(const std::vector<GaborParams>& bank,
                                                  const ConversionRates& rates,
                                                  bool canonical = true);

}  // namespace strfkit
