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

// Gradient-based learning of Gabor STRF parameters.
//
// Model, per example Y (frames x mels):
//   Z_k    = Y * g_k                                  (complex STRF layer)
//   x_kp   = projection p of Z_k                      (Re, Im, |.| per OutputMode)
//   phi_kp = log(mean_{t,f} x_kp^2 + kFeatureEpsilon) (pooled log power)
//   logits = W phi + b,  loss = mean cross-entropy of softmax(logits)
//
// The only trainable quantities are the four parameters of every filter and
// the linear readout (W, b). Filter gradients are assembled by pulling the
// pooled-feature gradient back through the convolution adjoint and summing
// dL/dg against dg/dtheta over the kernel grid.

#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strfkit/gaborkit.hpp"
#include "strfkit/error.hpp"
#include "strfkit/strfconv.hpp"

namespace strfkit {

inline constexpr double kFeatureEpsilon = 1e-8;

struct Example {
  Eigen::MatrixXd spectrogram;  // frames x mels
  int label = 0;
};

enum class Optimizer { kSgd, kAdam };

struct TrainConfig {
  int n_filters = 16;
  double learning_rate = 1e-2;
  int n_epochs = 30;
  int batch_size = 16;
  Optimizer optimizer = Optimizer::kAdam;
  std::uint64_t seed = 0;
  OutputMode output_mode = OutputMode::kConcatReIm;
  KernelGrid grid;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double divergence_threshold = 1e6;
  // Parameters sampled for the finite-difference check run before training
  // (0 disables it).
  int gradient_check_samples = 12;

  // Throws InvalidConfig on non-positive counts or learning rate < 0.
  void validate() const;
};

struct Readout {
  Eigen::MatrixXd weights;  // n_classes x (parts_per_value(mode) * n_filters)
  Eigen::VectorXd bias;     // n_classes

  static Readout zeros(int n_classes, int n_features);
};

// Gradient order per filter: sigma_t, sigma_f, F, gamma.
using ParamGrad = std::array<double, 4>;

struct LossAndGrads {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<ParamGrad> param_grads;
  Eigen::MatrixXd weight_grad;
  Eigen::VectorXd bias_grad;
};

// Pooled log-power features of one example, laid out p * n_filters + k.
Eigen::VectorXd pooled_features(const Eigen::MatrixXd& spectrogram, std::span<const GaborParams> bank,
                                const KernelGrid& grid, OutputMode mode);

// Forward + backward over a batch. Per-example work may run in parallel;
// accumulation happens in batch-index order so results are reproducible.
// Throws NumericalError (with the filter index when one is at fault) if the
// loss is not finite.
LossAndGrads loss_and_param_grads(std::span<const Example> batch, std::span<const GaborParams> bank,
                                  const Readout& readout, const TrainConfig& cfg);

// Forward only: (loss, accuracy).
std::pair<double, double> evaluate(std::span<const Example> batch, std::span<const GaborParams> bank,
                                   const Readout& readout, const TrainConfig& cfg);

// Random initial bank: omega uniform in [-0.5, 0.5] cycles/frame, Omega in
// [0, 0.5] cycles/channel (mapped to polar), sigma_t in [2, 20] frames,
// sigma_f in [0.5, 2] channels.
std::vector<GaborParams> initial_bank(int n_filters, std::uint64_t seed);

struct GradientCheckSummary {
  int n_checked = 0;
  double max_relative_error = 0.0;
  double p99_relative_error = 0.0;
};

// Central differences of the full loss (step h on each sampled filter
// parameter) against loss_and_param_grads.
GradientCheckSummary check_gradients(std::span<const Example> batch, std::span<const GaborParams> bank,
                                     const Readout& readout, const TrainConfig& cfg, int n_samples,
                                     std::uint64_t seed, double step = 1e-4);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;      // mean minibatch loss over the epoch
  double accuracy = 0.0;  // train accuracy with end-of-epoch parameters
};

struct TrainReport {
  std::string task_name;
  int n_classes = 0;
  std::vector<EpochMetrics> epochs;
  std::vector<GaborParams> initial_bank;
  std::vector<GaborParams> final_bank;
  Readout readout;
  double initial_accuracy = 0.0;
  double final_accuracy = 0.0;
  std::optional<GradientCheckSummary> gradient_check;
  // Per class, the filter whose readout weights most favor that class over
  // the average of the others.
  std::vector<int> class_preferred_filter;
};

class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, TrainReport last_stable)
      : Error(what), last_stable_(std::move(last_stable)) {}
  const TrainReport& last_stable() const { return last_stable_; }

 private:
  TrainReport last_stable_;
};

std::vector<int> class_preferred_filters(const Readout& readout, int n_filters, OutputMode mode);

// Full training loop on a fixed training set. Spreads are updated in log
// space and clamped at kSigmaMin; F is kept in [0, kMaxModulation].
TrainReport train(std::span<const Example> train_set, int n_classes, const TrainConfig& cfg,
                  const std::string& task_name = "");

}  // namespace strfkit
