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

#include "strfkit/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "strfkit/parallel.hpp"

namespace strfkit {

using cplx = std::complex<double>;

void TrainConfig::validate() const {
  if (n_filters <= 0) throw InvalidConfig("n_filters must be positive");
  if (n_epochs <= 0) throw InvalidConfig("n_epochs must be positive");
  if (batch_size <= 0) throw InvalidConfig("batch_size must be positive");
  if (!(learning_rate >= 0.0)) throw InvalidConfig("learning_rate must be >= 0");
  grid.validate();
}

Readout Readout::zeros(int n_classes, int n_features) {
  return {Eigen::MatrixXd::Zero(n_classes, n_features), Eigen::VectorXd::Zero(n_classes)};
}

namespace {

struct Forward {
  std::optional<FftConvolver> conv;
  std::vector<Eigen::MatrixXcd> z;
  Eigen::VectorXd power;  // mean square per feature, before the log
  Eigen::VectorXd phi;
};

std::vector<ComplexKernel> make_kernels(std::span<const GaborParams> bank, const KernelGrid& grid) {
  std::vector<ComplexKernel> kernels;
  kernels.reserve(bank.size());
  for (const auto& p : bank) kernels.push_back(gabor_kernel(p, grid));
  return kernels;
}

Forward forward(const Eigen::MatrixXd& y, const std::vector<ComplexKernel>& kernels, const KernelGrid& grid,
                OutputMode mode, bool keep_maps) {
  const auto n = static_cast<Eigen::Index>(kernels.size());
  const int parts = parts_per_value(mode);
  const double cells = static_cast<double>(y.size());

  Forward fw;
  fw.conv.emplace(y, grid);
  fw.power.resize(parts * n);
  if (keep_maps) fw.z.resize(kernels.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::MatrixXcd z = fw.conv->convolve(kernels[static_cast<std::size_t>(k)]);
    const double re2 = z.real().squaredNorm() / cells;
    const double im2 = z.imag().squaredNorm() / cells;
    switch (mode) {
      case OutputMode::kReal: fw.power[k] = re2; break;
      case OutputMode::kImag: fw.power[k] = im2; break;
      case OutputMode::kMagnitude: fw.power[k] = re2 + im2; break;
      case OutputMode::kConcatReIm:
        fw.power[k] = re2;
        fw.power[n + k] = im2;
        break;
    }
    if (keep_maps) fw.z[static_cast<std::size_t>(k)] = std::move(z);
  }
  fw.phi = (fw.power.array() + kFeatureEpsilon).log().matrix();
  return fw;
}

// Index of the first filter with a non-finite feature, or npos.
std::size_t first_bad_filter(const Eigen::VectorXd& phi, Eigen::Index n_filters) {
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    if (!std::isfinite(phi[i])) return static_cast<std::size_t>(i % n_filters);
  return NumericalError::npos;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

void check_inputs(std::span<const Example> batch, std::span<const GaborParams> bank, const Readout& readout,
                  const TrainConfig& cfg) {
  if (batch.empty()) throw InvalidInput("empty batch");
  if (bank.empty()) throw InvalidInput("empty filter bank");
  const auto n_features = static_cast<Eigen::Index>(parts_per_value(cfg.output_mode) * bank.size());
  if (readout.weights.cols() != n_features || readout.bias.size() != readout.weights.rows())
    throw InvalidInput("readout dimensions do not match the pooled feature size");
  for (const auto& ex : batch) {
    if (ex.label < 0 || ex.label >= readout.weights.rows()) throw InvalidInput("label out of range");
    if (ex.spectrogram.cols() < cfg.grid.n_freq) throw InvalidInput("spectrogram narrower than the kernel");
  }
}

struct ExampleResult {
  double loss = 0.0;
  bool correct = false;
  Eigen::VectorXd phi;
  Eigen::VectorXd dlogit;
  std::vector<ComplexKernel> adjoint;  // per filter, empty when not needed
  std::size_t bad_filter = NumericalError::npos;
};

}  // namespace

Eigen::VectorXd pooled_features(const Eigen::MatrixXd& spectrogram, std::span<const GaborParams> bank,
                                const KernelGrid& grid, OutputMode mode) {
  return forward(spectrogram, make_kernels(bank, grid), grid, mode, false).phi;
}

LossAndGrads loss_and_param_grads(std::span<const Example> batch, std::span<const GaborParams> bank,
                                  const Readout& readout, const TrainConfig& cfg) {
  check_inputs(batch, bank, readout, cfg);
  const auto n = static_cast<Eigen::Index>(bank.size());
  const auto batch_n = static_cast<double>(batch.size());
  const auto kernels = make_kernels(bank, cfg.grid);
  const OutputMode mode = cfg.output_mode;

  std::vector<ExampleResult> results(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    const Example& ex = batch[i];
    ExampleResult& r = results[i];
    Forward fw = forward(ex.spectrogram, kernels, cfg.grid, mode, true);
    r.phi = fw.phi;
    r.bad_filter = first_bad_filter(fw.phi, n);
    const Eigen::VectorXd logits = readout.weights * fw.phi + readout.bias;
    const Eigen::VectorXd prob = softmax(logits);
    Eigen::Index arg;
    logits.maxCoeff(&arg);
    r.correct = arg == ex.label;
    r.loss = -std::log(prob[ex.label]);
    r.dlogit = prob;
    r.dlogit[ex.label] -= 1.0;
    r.dlogit /= batch_n;

    const Eigen::VectorXd dphi = readout.weights.transpose() * r.dlogit;
    const double cells = static_cast<double>(ex.spectrogram.size());
    r.adjoint.resize(kernels.size());
    for (Eigen::Index k = 0; k < n; ++k) {
      // d phi / d x = 2 x / (cells * (power + eps)) for each projected value x
      auto coeff = [&](Eigen::Index idx) { return dphi[idx] * 2.0 / (cells * (fw.power[idx] + kFeatureEpsilon)); };
      double c_re = 0.0, c_im = 0.0;
      switch (mode) {
        case OutputMode::kReal: c_re = coeff(k); break;
        case OutputMode::kImag: c_im = coeff(k); break;
        case OutputMode::kMagnitude: c_re = c_im = coeff(k); break;
        case OutputMode::kConcatReIm:
          c_re = coeff(k);
          c_im = coeff(n + k);
          break;
      }
      if (c_re == 0.0 && c_im == 0.0) continue;
      const auto& z = fw.z[static_cast<std::size_t>(k)];
      Eigen::MatrixXcd upstream(z.rows(), z.cols());
      upstream.real() = c_re * z.real();
      upstream.imag() = c_im * z.imag();
      r.adjoint[static_cast<std::size_t>(k)] = fw.conv->correlate(upstream);
    }
  });

  LossAndGrads out;
  out.weight_grad = Eigen::MatrixXd::Zero(readout.weights.rows(), readout.weights.cols());
  out.bias_grad = Eigen::VectorXd::Zero(readout.bias.size());
  std::vector<Eigen::MatrixXcd> adjoint_sum(bank.size(),
                                            Eigen::MatrixXcd::Zero(cfg.grid.n_freq, cfg.grid.n_time));
  double correct = 0.0;
  for (const auto& r : results) {
    out.loss += r.loss / batch_n;
    correct += r.correct ? 1.0 : 0.0;
    out.weight_grad += r.dlogit * r.phi.transpose();
    out.bias_grad += r.dlogit;
    for (std::size_t k = 0; k < bank.size(); ++k)
      if (r.adjoint[k].values.size() != 0) adjoint_sum[k] += r.adjoint[k].values;
  }
  out.accuracy = correct / batch_n;
  if (!std::isfinite(out.loss)) {
    std::size_t bad = NumericalError::npos;
    for (const auto& r : results)
      if (r.bad_filter != NumericalError::npos) {
        bad = r.bad_filter;
        break;
      }
    throw NumericalError("non-finite loss", bad);
  }

  out.param_grads.resize(bank.size());
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const KernelGradients d = gabor_gradients(bank[k], cfg.grid);
    const auto& h = adjoint_sum[k];
    auto contract = [&](const ComplexKernel& dk) { return (h.conjugate().array() * dk.values.array()).real().sum(); };
    out.param_grads[k] = {contract(d.d_sigma_t), contract(d.d_sigma_f), contract(d.d_F), contract(d.d_gamma)};
  }
  return out;
}

std::pair<double, double> evaluate(std::span<const Example> batch, std::span<const GaborParams> bank,
                                   const Readout& readout, const TrainConfig& cfg) {
  check_inputs(batch, bank, readout, cfg);
  const auto kernels = make_kernels(bank, cfg.grid);
  std::vector<std::pair<double, bool>> results(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    const auto fw = forward(batch[i].spectrogram, kernels, cfg.grid, cfg.output_mode, false);
    const Eigen::VectorXd logits = readout.weights * fw.phi + readout.bias;
    Eigen::Index arg;
    logits.maxCoeff(&arg);
    results[i] = {-std::log(softmax(logits)[batch[i].label]), arg == batch[i].label};
  });
  double loss = 0.0, correct = 0.0;
  for (const auto& [l, c] : results) {
    loss += l;
    correct += c ? 1.0 : 0.0;
  }
  const auto count = static_cast<double>(batch.size());
  return {loss / count, correct / count};
}

std::vector<GaborParams> initial_bank(int n_filters, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<GaborParams> bank;
  bank.reserve(static_cast<std::size_t>(n_filters));
  for (int k = 0; k < n_filters; ++k) {
    const double omega = (unit(rng) - 0.5);  // [-0.5, 0.5] cycles/frame
    const double Omega = 0.5 * unit(rng);    // [0, 0.5] cycles/channel
    const double sigma_t = 2.0 + 18.0 * unit(rng);
    const double sigma_f = 0.5 + 1.5 * unit(rng);
    bank.push_back({.sigma_t = sigma_t,
                    .sigma_f = sigma_f,
                    .F = std::min(std::hypot(omega, Omega), kMaxModulation),
                    .gamma = std::atan2(Omega, omega)});
  }
  return bank;
}

GradientCheckSummary check_gradients(std::span<const Example> batch, std::span<const GaborParams> bank,
                                     const Readout& readout, const TrainConfig& cfg, int n_samples,
                                     std::uint64_t seed, double step) {
  const LossAndGrads analytic = loss_and_param_grads(batch, bank, readout, cfg);
  const int total = static_cast<int>(bank.size()) * 4;
  std::vector<int> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(std::min(n_samples, total)));

  double scale = 0.0;
  for (const auto& g : analytic.param_grads)
    for (double v : g) scale = std::max(scale, std::abs(v));
  const double floor = std::max(1e-6 * scale, 1e-12);

  std::vector<double> errors;
  std::vector<GaborParams> probe(bank.begin(), bank.end());
  for (int idx : order) {
    const auto k = static_cast<std::size_t>(idx / 4);
    double GaborParams::*field = nullptr;
    switch (idx % 4) {
      case 0: field = &GaborParams::sigma_t; break;
      case 1: field = &GaborParams::sigma_f; break;
      case 2: field = &GaborParams::F; break;
      default: field = &GaborParams::gamma; break;
    }
    const double base = probe[k].*field;
    probe[k].*field = base + step;
    const double up = evaluate(batch, probe, readout, cfg).first;
    probe[k].*field = base - step;
    const double down = evaluate(batch, probe, readout, cfg).first;
    probe[k].*field = base;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic.param_grads[k][static_cast<std::size_t>(idx % 4)];
    errors.push_back(std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor}));
  }

  GradientCheckSummary s;
  s.n_checked = static_cast<int>(errors.size());
  if (errors.empty()) return s;
  std::sort(errors.begin(), errors.end());
  s.max_relative_error = errors.back();
  const double pos = 0.99 * static_cast<double>(errors.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, errors.size() - 1);
  s.p99_relative_error = errors[lo] + (pos - static_cast<double>(lo)) * (errors[hi] - errors[lo]);
  return s;
}

std::vector<int> class_preferred_filters(const Readout& readout, int n_filters, OutputMode mode) {
  const int parts = parts_per_value(mode);
  const auto n_classes = readout.weights.rows();
  std::vector<int> preferred(static_cast<std::size_t>(n_classes), 0);
  for (Eigen::Index c = 0; c < n_classes; ++c) {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_filters; ++k) {
      double score = 0.0;
      for (int p = 0; p < parts; ++p) {
        const auto col = readout.weights.col(p * n_filters + k);
        const double others = n_classes > 1 ? (col.sum() - col[c]) / static_cast<double>(n_classes - 1) : 0.0;
        score += col[c] - others;
      }
      if (score > best) {
        best = score;
        preferred[static_cast<std::size_t>(c)] = k;
      }
    }
  }
  return preferred;
}

TrainReport train(std::span<const Example> train_set, int n_classes, const TrainConfig& cfg,
                  const std::string& task_name) {
  cfg.validate();
  if (train_set.empty()) throw InvalidInput("empty training set");
  if (n_classes < 2) throw InvalidInput("need at least two classes");

  const int n = cfg.n_filters;
  const int n_features = parts_per_value(cfg.output_mode) * n;
  std::vector<GaborParams> bank = initial_bank(n, cfg.seed);
  Readout readout = Readout::zeros(n_classes, n_features);

  TrainReport report;
  report.task_name = task_name;
  report.n_classes = n_classes;
  report.initial_bank = bank;
  report.initial_accuracy = evaluate(train_set, bank, readout, cfg).second;
  if (cfg.gradient_check_samples > 0) {
    // Zero readout makes every filter gradient vanish, so check against a
    // seeded random readout instead.
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Readout probe = readout;
    for (Eigen::Index i = 0; i < probe.weights.size(); ++i) probe.weights(i) = gauss(rng);
    const auto sub = train_set.first(std::min<std::size_t>(train_set.size(), 4));
    report.gradient_check = check_gradients(sub, bank, probe, cfg, cfg.gradient_check_samples, cfg.seed);
  }

  // Flat optimizer state: 4 per filter, then weights (column-major), then bias.
  const std::size_t n_params = static_cast<std::size_t>(4 * n + readout.weights.size() + readout.bias.size());
  std::vector<double> m1(n_params, 0.0), m2(n_params, 0.0), grad(n_params, 0.0);
  std::int64_t step_count = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(cfg.seed + 1);
  std::vector<Example> batch;

  for (int epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    int n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(train_set[order[i]]);

      auto diverged = [&](const std::string& why) {
        report.final_bank = bank;
        report.readout = readout;
        return DivergedError("training diverged at epoch " + std::to_string(epoch) + " (" + why + ")", report);
      };
      LossAndGrads g;
      try {
        g = loss_and_param_grads(batch, bank, readout, cfg);
      } catch (const NumericalError& e) {
        throw diverged(e.what());
      }
      if (!(g.loss <= cfg.divergence_threshold)) throw diverged("loss " + std::to_string(g.loss));
      loss_sum += g.loss;
      ++n_batches;

      std::size_t j = 0;
      for (int k = 0; k < n; ++k) {
        const auto& pg = g.param_grads[static_cast<std::size_t>(k)];
        grad[j++] = pg[0] * bank[static_cast<std::size_t>(k)].sigma_t;  // d/d log sigma_t
        grad[j++] = pg[1] * bank[static_cast<std::size_t>(k)].sigma_f;
        grad[j++] = pg[2];
        grad[j++] = pg[3];
      }
      for (Eigen::Index i = 0; i < g.weight_grad.size(); ++i) grad[j++] = g.weight_grad(i);
      for (Eigen::Index i = 0; i < g.bias_grad.size(); ++i) grad[j++] = g.bias_grad(i);

      ++step_count;
      std::vector<double> delta(n_params);
      if (cfg.optimizer == Optimizer::kAdam) {
        const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step_count));
        const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step_count));
        for (std::size_t i = 0; i < n_params; ++i) {
          m1[i] = cfg.adam_beta1 * m1[i] + (1.0 - cfg.adam_beta1) * grad[i];
          m2[i] = cfg.adam_beta2 * m2[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
          delta[i] = cfg.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + cfg.adam_epsilon);
        }
      } else {
        for (std::size_t i = 0; i < n_params; ++i) delta[i] = cfg.learning_rate * grad[i];
      }

      j = 0;
      for (auto& p : bank) {
        p.sigma_t = std::max(p.sigma_t * std::exp(-delta[j++]), kSigmaMin);
        p.sigma_f = std::max(p.sigma_f * std::exp(-delta[j++]), kSigmaMin);
        p.F = std::clamp(p.F - delta[j++], 0.0, kMaxModulation);
        p.gamma = std::remainder(p.gamma - delta[j++], 2.0 * std::numbers::pi);
      }
      for (Eigen::Index i = 0; i < readout.weights.size(); ++i) readout.weights(i) -= delta[j++];
      for (Eigen::Index i = 0; i < readout.bias.size(); ++i) readout.bias(i) -= delta[j++];
    }
    const auto [eval_loss, eval_acc] = evaluate(train_set, bank, readout, cfg);
    (void)eval_loss;
    report.epochs.push_back({epoch, loss_sum / n_batches, eval_acc});
  }

  report.final_bank = bank;
  report.readout = readout;
  report.final_accuracy = report.epochs.back().accuracy;
  report.class_preferred_filter = class_preferred_filters(readout, n, cfg.output_mode);
  return report;
}

}  // namespace strfkit
