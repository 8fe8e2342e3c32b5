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

// Complex STRF layer: Z(t, f, k) = sum_{u,v} Y(u, v) g_k(t - u, f - v), a true
// 2-D convolution with "same" output size and zero padding on both axes.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strfkit/gaborkit.hpp"
#include "strfkit/melfront.hpp"

namespace strfkit {

enum class OutputMode : std::uint16_t { kReal = 0, kImag = 1, kMagnitude = 2, kConcatReIm = 3 };

std::string to_string(OutputMode mode);
// Accepts "real", "imag", "magnitude", "concat" (case-sensitive).
std::optional<OutputMode> parse_output_mode(const std::string& s);

// Number of real values a projection produces per complex input value.
inline int parts_per_value(OutputMode mode) { return mode == OutputMode::kConcatReIm ? 2 : 1; }

struct FeatureMap {
  std::vector<Eigen::MatrixXcd> slabs;  // one n_frames x n_mels slab per filter

  Eigen::Index n_frames() const { return slabs.empty() ? 0 : slabs.front().rows(); }
  Eigen::Index n_mels() const { return slabs.empty() ? 0 : slabs.front().cols(); }
  std::size_t n_filters() const { return slabs.size(); }
};

// Dense real tensor, index (t, c, k) stored at (t * n_channels + c) * n_filters + k.
struct RealTensor {
  Eigen::Index n_frames = 0;
  Eigen::Index n_channels = 0;
  Eigen::Index n_filters = 0;
  std::vector<double> data;

  double& operator()(Eigen::Index t, Eigen::Index c, Eigen::Index k) {
    return data[static_cast<std::size_t>((t * n_channels + c) * n_filters + k)];
  }
  double operator()(Eigen::Index t, Eigen::Index c, Eigen::Index k) const {
    return data[static_cast<std::size_t>((t * n_channels + c) * n_filters + k)];
  }
};

enum class ConvPath { kAuto, kDirect, kFft };

// kAuto takes the FFT path once kernel area x frames exceeds this.
// Measured with strfkit_bench_conv; see README.
inline constexpr long kFftCrossover = 4096;

// Direct nested-loop evaluation.
Eigen::MatrixXcd convolve_same_direct(const Eigen::MatrixXd& y, const ComplexKernel& kernel);

// Holds the zero-padded spectrum of one input so many kernels can be applied
// (and their adjoints evaluated) without re-transforming the input.
class FftConvolver {
 public:
  FftConvolver(const Eigen::MatrixXd& y, const KernelGrid& grid);
  ~FftConvolver();
  FftConvolver(FftConvolver&&) noexcept;
  FftConvolver& operator=(FftConvolver&&) noexcept;

  Eigen::MatrixXcd convolve(const ComplexKernel& kernel) const;

  // Adjoint of convolve with respect to the kernel. For an upstream gradient
  // G = dL/dRe(Z) + j dL/dIm(Z) it returns H over the kernel support with
  // H(a, b) = sum_{t,f} G(t, f) Y(t - a, f - b), so that
  // dL/dtheta = sum Re(conj(H) * dg/dtheta).
  ComplexKernel correlate(const Eigen::MatrixXcd& upstream) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Pre: y.n_mels() >= grid.n_freq, y.n_frames() >= 1, bank non-empty.
FeatureMap apply_bank(const MelSpectrogram& y, std::span<const GaborParams> bank,
                      const KernelGrid& grid, ConvPath path = ConvPath::kAuto);

// REAL -> Re Z, IMAG -> Im Z, MAGNITUDE -> |Z|, CONCAT_RE_IM -> [Re Z, Im Z]
// stacked on the channel axis (channels 0..M-1 real, M..2M-1 imaginary).
RealTensor project(const FeatureMap& z, OutputMode mode);

// Contraction: mean over the mel axis of each projected slab. Result is
// n_frames x (parts_per_value(mode) * n_filters), column p * n_filters + k.
Eigen::MatrixXd contract(const FeatureMap& z, OutputMode mode);

// Binary layout (little-endian):
//   "STRZ" | u16 version | u16 mode | u32 n_frames | u32 n_channels |
//   u32 n_filters | f32 data in RealTensor order
void write_feature_binary(std::ostream& os, const RealTensor& x, OutputMode mode);
RealTensor read_feature_binary(std::istream& is, OutputMode* mode = nullptr);
// One CSV slice (frames x channels) for filter k.
void write_feature_csv(std::ostream& os, const RealTensor& x, Eigen::Index k);

}  // namespace strfkit
