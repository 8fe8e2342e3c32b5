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

#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "strfkit/learner.hpp"
#include "strfkit/tasks.hpp"
#include "test_util.hpp"

using namespace strfkit;
using strfkit::testing::make_rng;
using strfkit::testing::random_matrix;
using strfkit::testing::random_params;
using strfkit::testing::uniform;

namespace {

constexpr int kModes[] = {0, 1, 2, 3};

OutputMode mode_of(int m) { return static_cast<OutputMode>(m); }

TrainConfig small_config(int mode = 3) {
  TrainConfig cfg;
  cfg.grid = {.n_time = 11, .n_freq = 9};
  cfg.output_mode = mode_of(mode);
  return cfg;
}

struct Setup {
  std::vector<Example> batch;
  std::vector<GaborParams> bank;
  Readout readout;
};

Setup random_setup(std::uint64_t seed, int n_filters, int n_classes, int n_examples, int frames, int mode) {
  auto rng = make_rng(seed);
  Setup s;
  for (int i = 0; i < n_examples; ++i) s.batch.push_back({random_matrix(rng, frames, 12), i % n_classes});
  for (int k = 0; k < n_filters; ++k) s.bank.push_back(random_params(rng));
  const int features = (mode == 3 ? 2 : 1) * n_filters;
  s.readout = {random_matrix(rng, n_classes, features), random_matrix(rng, n_classes, 1).col(0)};
  return s;
}

double oracle(const Setup& s, const std::vector<GaborParams>& bank, int mode) {
  std::vector<std::pair<Eigen::MatrixXd, int>> batch;
  for (const auto& e : s.batch) batch.emplace_back(e.spectrogram, e.label);
  return strfkit::testing::loss_oracle(batch, bank, s.readout.weights, s.readout.bias, 11, 9, mode);
}

// Relative errors of every filter-parameter gradient against central
// differences (step 1e-4) of the term-by-term loss. Gradients below 1e-7 in
// magnitude are compared on the absolute scale.
std::vector<double> fd_errors(const Setup& s, int mode) {
  const auto cfg = small_config(mode);
  const auto analytic = loss_and_param_grads(s.batch, s.bank, s.readout, cfg);
  std::vector<double> errors;
  double GaborParams::*fields[] = {&GaborParams::sigma_t, &GaborParams::sigma_f, &GaborParams::F,
                                   &GaborParams::gamma};
  for (std::size_t k = 0; k < s.bank.size(); ++k) {
    for (std::size_t j = 0; j < 4; ++j) {
      auto up = s.bank, down = s.bank;
      up[k].*fields[j] += 1e-4;
      down[k].*fields[j] -= 1e-4;
      const double numeric = (oracle(s, up, mode) - oracle(s, down, mode)) / 2e-4;
      errors.push_back(strfkit::testing::relative_error(analytic.param_grads[k][j], numeric, 1e-7));
    }
  }
  return errors;
}

std::vector<Example> tiny_chirp_set() {
  MelConfig mel;
  mel.n_mels = 32;
  return generate_examples(chirp_direction_task(), 3, 11, mel);
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.n_filters = 3;
  cfg.n_epochs = 2;
  cfg.batch_size = 4;
  cfg.gradient_check_samples = 0;
  cfg.grid = {.n_time = 21, .n_freq = 7};
  return cfg;
}

}  // namespace

TEST_SUITE("learner") {

TEST_CASE("zero readout gives ln(C), zero filter gradients, nonzero readout gradients") {
  for (int classes : {2, 3, 4}) {
    auto s = random_setup(5, 2, classes, 5, 6, 3);
    s.readout = Readout::zeros(classes, 4);
    const auto g = loss_and_param_grads(s.batch, s.bank, s.readout, small_config());
    CHECK(g.loss == doctest::Approx(std::log(static_cast<double>(classes))).epsilon(1e-15));
    for (const auto& pg : g.param_grads)
      for (double v : pg) CHECK(v == 0.0);
    CHECK(g.weight_grad.cwiseAbs().maxCoeff() > 0.0);
    CHECK(g.bias_grad.cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("duplicating every example leaves loss and gradients unchanged") {
  const auto s = random_setup(9, 3, 3, 5, 7, 3);
  auto doubled = s.batch;
  doubled.insert(doubled.end(), s.batch.begin(), s.batch.end());
  const auto a = loss_and_param_grads(s.batch, s.bank, s.readout, small_config());
  const auto b = loss_and_param_grads(doubled, s.bank, s.readout, small_config());
  CHECK(std::abs(a.loss - b.loss) < 1e-12);
  CHECK((a.weight_grad - b.weight_grad).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.bias_grad - b.bias_grad).cwiseAbs().maxCoeff() < 1e-12);
  for (std::size_t k = 0; k < a.param_grads.size(); ++k)
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(a.param_grads[k][j] - b.param_grads[k][j]) < 1e-12);
}

TEST_CASE("loss matches the term-by-term oracle") {
  for (int mode : kModes) {
    const auto s = random_setup(20 + mode, 2, 3, 3, 5, mode);
    const auto g = loss_and_param_grads(s.batch, s.bank, s.readout, small_config(mode));
    CHECK(g.loss == doctest::Approx(oracle(s, s.bank, mode)).epsilon(1e-10));
  }
}

TEST_CASE("end-to-end gradients match finite differences on a 3-frame input") {
  for (int mode : kModes) {
    const auto s = random_setup(40 + mode, 2, 2, 2, 3, mode);
    for (double e : fd_errors(s, mode)) CHECK_MESSAGE(e < 1e-3, "mode " << mode);
  }
}

TEST_CASE("gradient check over 50 random configurations") {
  std::vector<double> errors;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int mode = static_cast<int>(seed % 4);
    const int frames = 3 + static_cast<int>(seed % 5);
    const auto e = fd_errors(random_setup(1000 + seed, 2, 3, 2, frames, mode), mode);
    errors.insert(errors.end(), e.begin(), e.end());
  }
  CHECK(errors.size() == 400);
  CHECK(strfkit::testing::percentile(errors, 0.99) < 1e-3);
}

TEST_CASE("readout gradients match finite differences") {
  const auto s = random_setup(77, 2, 3, 3, 4, 3);
  const auto cfg = small_config();
  const auto g = loss_and_param_grads(s.batch, s.bank, s.readout, cfg);
  for (Eigen::Index i = 0; i < s.readout.weights.size(); ++i) {
    auto up = s, down = s;
    up.readout.weights(i) += 1e-5;
    down.readout.weights(i) -= 1e-5;
    const double numeric = (oracle(up, s.bank, 3) - oracle(down, s.bank, 3)) / 2e-5;
    CHECK(strfkit::testing::relative_error(g.weight_grad(i), numeric, 1e-7) < 1e-5);
  }
}

TEST_CASE("check_gradients harness agrees with the analytic path") {
  const auto s = random_setup(3, 3, 2, 3, 6, 3);
  const auto summary = check_gradients(s.batch, s.bank, s.readout, small_config(), 12, 0);
  CHECK(summary.n_checked == 12);
  CHECK(summary.p99_relative_error < 1e-3);
  CHECK(summary.max_relative_error >= summary.p99_relative_error);
}

TEST_CASE("preconditions and numerical errors") {
  auto s = random_setup(8, 2, 2, 2, 4, 3);
  const auto cfg = small_config();
  CHECK_THROWS_AS(loss_and_param_grads(s.batch, {}, s.readout, cfg), InvalidInput);
  CHECK_THROWS_AS(loss_and_param_grads(s.batch, s.bank, Readout::zeros(2, 3), cfg), InvalidInput);
  auto bad_label = s.batch;
  bad_label[0].label = 5;
  CHECK_THROWS_AS(loss_and_param_grads(bad_label, s.bank, s.readout, cfg), InvalidInput);

  s.batch[1].spectrogram(2, 3) = std::numeric_limits<double>::quiet_NaN();
  try {
    loss_and_param_grads(s.batch, s.bank, s.readout, cfg);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.filter_index() == 0);
  }

  TrainConfig bad;
  bad.n_filters = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = TrainConfig{};
  bad.learning_rate = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = TrainConfig{};
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("initial bank follows the documented ranges") {
  const auto bank = initial_bank(200, 4);
  for (const auto& p : bank) {
    const auto m = to_cartesian(p, ConversionRates{.frame_rate = 1.0, .channels_per_octave = 1.0});
    CHECK(std::abs(m.omega) <= 0.5 + 1e-12);
    CHECK(m.Omega >= -1e-12);
    CHECK(m.Omega <= 0.5 + 1e-12);
    CHECK(p.sigma_t >= 2.0);
    CHECK(p.sigma_t <= 20.0);
    CHECK(p.sigma_f >= 0.5);
    CHECK(p.sigma_f <= 2.0);
    CHECK(p.F <= kMaxModulation);
  }
  CHECK(initial_bank(5, 4) == initial_bank(5, 4));
  CHECK_FALSE(initial_bank(5, 4) == initial_bank(5, 5));
}

TEST_CASE("an up-sweep excites the omega < 0 filter more than its mirror") {
  // Power of a ridge moving to higher channels over time, through a filter
  // and its time-reversed twin.
  Eigen::MatrixXd y(120, 40);
  for (int t = 0; t < 120; ++t)
    for (int f = 0; f < 40; ++f) y(t, f) = std::cos(2.0 * std::numbers::pi * (0.15 * f - 0.1 * t));
  const KernelGrid grid;
  const double Omega = 0.15, omega = 0.1;
  const GaborParams neg{.sigma_t = 8.0, .sigma_f = 2.0, .F = std::hypot(omega, Omega), .gamma = std::atan2(Omega, -omega)};
  const GaborParams pos{.sigma_t = 8.0, .sigma_f = 2.0, .F = std::hypot(omega, Omega), .gamma = std::atan2(Omega, omega)};
  const auto phi = pooled_features(y, std::vector<GaborParams>{neg, pos}, grid, OutputMode::kMagnitude);
  CHECK(phi[0] > phi[1] + 1.0);
}

TEST_CASE("class_preferred_filters picks the filter favoring each class") {
  Readout r = Readout::zeros(2, 6);  // 3 filters, concat
  r.weights(0, 2) = 1.0;
  r.weights(0, 5) = 1.0;
  r.weights(1, 1) = 0.5;
  r.weights(1, 3) = 2.0;
  const auto pref = class_preferred_filters(r, 3, OutputMode::kConcatReIm);
  CHECK(pref == std::vector<int>{2, 0});
}

TEST_CASE("toy task generation is balanced and reproducible") {
  const auto task = chirp_direction_task();
  MelConfig mel;
  mel.n_mels = 32;
  const auto a = generate_examples(task, 3, 1, mel);
  const auto b = generate_examples(task, 3, 1, mel);
  const auto c = generate_examples(task, 3, 2, mel);
  REQUIRE(a.size() == 6);
  int ups = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ups += a[i].label == 0;
    CHECK(a[i].spectrogram == b[i].spectrogram);
    CHECK(a[i].spectrogram.rows() == 98);
    CHECK(a[i].spectrogram.cols() == 32);
    CHECK(std::abs(a[i].spectrogram.mean()) < 1e-9);
  }
  CHECK(ups == 3);
  CHECK_FALSE(a[0].spectrogram == c[0].spectrogram);
  CHECK(make_task("speech-like").n_classes == 4);
  CHECK_THROWS_AS(make_task("nope"), InvalidConfig);
}

TEST_CASE("learning rate zero leaves parameters bit-identical") {
  const auto data = tiny_chirp_set();
  auto cfg = tiny_train_config();
  cfg.learning_rate = 0.0;
  for (auto opt : {Optimizer::kAdam, Optimizer::kSgd}) {
    cfg.optimizer = opt;
    const auto r = train(data, 2, cfg);
    CHECK(r.final_bank == r.initial_bank);
    CHECK(r.readout.weights.isZero(0.0));
    CHECK(r.final_accuracy == r.initial_accuracy);
  }
}

TEST_CASE("identical seeds give identical reports") {
  const auto data = tiny_chirp_set();
  auto cfg = tiny_train_config();
  cfg.gradient_check_samples = 4;
  const auto a = train(data, 2, cfg, "x");
  const auto b = train(data, 2, cfg, "x");
  CHECK(a.final_bank == b.final_bank);
  CHECK(a.readout.weights == b.readout.weights);
  CHECK(a.readout.bias == b.readout.bias);
  REQUIRE(a.epochs.size() == 2);
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    CHECK(a.epochs[i].loss == b.epochs[i].loss);
    CHECK(a.epochs[i].accuracy == b.epochs[i].accuracy);
    CHECK(std::isfinite(a.epochs[i].loss));
  }
  REQUIRE(a.gradient_check.has_value());
  CHECK(a.gradient_check->max_relative_error == b.gradient_check->max_relative_error);
  CHECK_FALSE(a.final_bank == a.initial_bank);
}

TEST_CASE("spreads stay above the floor under aggressive updates") {
  const auto data = tiny_chirp_set();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto cfg = tiny_train_config();
    cfg.seed = seed;
    cfg.learning_rate = 2.0;
    cfg.optimizer = Optimizer::kAdam;
    try {
      const auto r = train(data, 2, cfg);
      for (const auto& p : r.final_bank) {
        CHECK(p.sigma_t >= kSigmaMin);
        CHECK(p.sigma_f >= kSigmaMin);
        CHECK(p.F >= 0.0);
        CHECK(p.F <= kMaxModulation);
      }
    } catch (const DivergedError& e) {
      for (const auto& p : e.last_stable().final_bank) {
        CHECK(p.sigma_t >= kSigmaMin);
        CHECK(p.sigma_f >= kSigmaMin);
      }
    }
  }
}

TEST_CASE("runaway SGD raises DivergedError with a snapshot") {
  const auto data = tiny_chirp_set();
  auto cfg = tiny_train_config();
  cfg.optimizer = Optimizer::kSgd;
  cfg.learning_rate = 1e9;
  cfg.n_epochs = 5;
  try {
    train(data, 2, cfg);
    FAIL("expected DivergedError");
  } catch (const DivergedError& e) {
    CHECK(e.last_stable().final_bank.size() == 3);
    CHECK(e.last_stable().initial_bank.size() == 3);
  }
}

}  // TEST_SUITE
