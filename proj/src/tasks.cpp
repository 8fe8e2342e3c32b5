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

#include "strfkit/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "strfkit/error.hpp"
#include "strfkit/parallel.hpp"

namespace strfkit {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double draw(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void add_white_noise(std::vector<double>& x, double snr_db, std::mt19937_64& rng) {
  double power = 0.0;
  for (double v : x) power += v * v;
  power /= static_cast<double>(x.size());
  std::normal_distribution<double> gauss(0.0, std::sqrt(power / std::pow(10.0, snr_db / 10.0)));
  for (double& v : x) v += gauss(rng);
}

// Log-frequency sweep of `octaves` starting at f_start, direction +1 (up)
// or -1 (down), with 5 ms raised-cosine ramps.
void add_sweep(std::vector<double>& x, int sr, double onset, double dur, double f_start, double octaves,
               int direction) {
  const double rate = direction * octaves / dur;  // octaves per second
  const double ramp = 0.005;
  const auto first = static_cast<std::size_t>(onset * sr);
  const auto count = static_cast<std::size_t>(dur * sr);
  for (std::size_t i = 0; i < count && first + i < x.size(); ++i) {
    const double tau = static_cast<double>(i) / sr;
    const double phase = kTwoPi * f_start * (std::exp2(rate * tau) - 1.0) / (rate * std::numbers::ln2);
    double gain = 1.0;
    if (tau < ramp) gain = 0.5 - 0.5 * std::cos(std::numbers::pi * tau / ramp);
    if (dur - tau < ramp) gain = 0.5 - 0.5 * std::cos(std::numbers::pi * (dur - tau) / ramp);
    x[first + i] += gain * std::sin(phase);
  }
}

Waveform chirp_train(int label, std::mt19937_64& rng, double duration, int sr) {
  Waveform w{.samples = std::vector<double>(static_cast<std::size_t>(duration * sr), 0.0), .sample_rate = sr};
  const int direction = label == 0 ? 1 : -1;
  double t = draw(rng, 0.0, 0.05);
  while (true) {
    const double dur = draw(rng, 0.08, 0.2);
    if (t + dur > duration) break;
    const double octaves = draw(rng, 0.7, 1.5);
    const double low = draw(rng, 300.0, std::min(3000.0, 7000.0 / std::exp2(octaves)));
    const double start = direction > 0 ? low : low * std::exp2(octaves);
    add_sweep(w.samples, sr, t, dur, start, octaves, direction);
    t += dur + draw(rng, 0.03, 0.1);
  }
  add_white_noise(w.samples, 20.0, rng);
  return w;
}

// Classes: bit 0 = fast syllable rate, bit 1 = falling formants.
Waveform speech_like(int label, std::mt19937_64& rng, double duration, int sr) {
  const bool fast = (label & 1) != 0;
  const bool falling = (label & 2) != 0;
  const double f0 = draw(rng, 100.0, 200.0);
  const double f0_wobble = draw(rng, 0.0, kTwoPi);
  const double syllable_rate = fast ? draw(rng, 5.0, 7.0) : draw(rng, 2.0, 3.5);
  const double syllable_phase = draw(rng, 0.0, kTwoPi);
  struct Formant {
    double from, to, bandwidth;
  };
  std::vector<Formant> formants = {
      {draw(rng, 350.0, 450.0), draw(rng, 750.0, 850.0), 90.0},
      {draw(rng, 1100.0, 1300.0), draw(rng, 1900.0, 2100.0), 120.0},
      {draw(rng, 2400.0, 2600.0), draw(rng, 2900.0, 3100.0), 150.0},
  };
  if (falling)
    for (auto& f : formants) std::swap(f.from, f.to);

  const auto n = static_cast<std::size_t>(duration * sr);
  Waveform w{.samples = std::vector<double>(n, 0.0), .sample_rate = sr};
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    const double pitch = f0 * (1.0 + 0.03 * std::sin(kTwoPi * 0.7 * t + f0_wobble));
    phase += kTwoPi * pitch / sr;
    const double u = t / duration;
    const double env = std::pow(0.5 - 0.5 * std::cos(kTwoPi * syllable_rate * t + syllable_phase), 2.0);
    double sample = 0.0;
    for (int h = 1; h * pitch < 4000.0; ++h) {
      const double fh = h * pitch;
      double amp = 0.0;
      for (const auto& f : formants) {
        const double centre = f.from + (f.to - f.from) * u;
        const double d = (fh - centre) / f.bandwidth;
        amp += std::exp(-0.5 * d * d);
      }
      sample += amp * std::sin(h * phase);
    }
    w.samples[i] = env * sample;
  }
  add_white_noise(w.samples, 30.0, rng);
  return w;
}

}  // namespace

ToyTask chirp_direction_task() {
  ToyTask task;
  task.name = "chirp-direction";
  task.n_classes = 2;
  task.class_names = {"up", "down"};
  task.synthesize = [d = task.duration, sr = task.sample_rate](int label, std::mt19937_64& rng) {
    return chirp_train(label, rng, d, sr);
  };
  return task;
}

ToyTask speech_like_task() {
  ToyTask task;
  task.name = "speech-like";
  task.n_classes = 4;
  task.class_names = {"slow-rising", "fast-rising", "slow-falling", "fast-falling"};
  task.synthesize = [d = task.duration, sr = task.sample_rate](int label, std::mt19937_64& rng) {
    return speech_like(label, rng, d, sr);
  };
  return task;
}

std::vector<std::string> task_names() { return {"chirp-direction", "speech-like"}; }

ToyTask make_task(const std::string& name) {
  if (name == "chirp-direction") return chirp_direction_task();
  if (name == "speech-like") return speech_like_task();
  throw InvalidConfig("unknown task '" + name + "' (known: chirp-direction, speech-like)");
}

std::vector<Example> generate_examples(const ToyTask& task, int examples_per_class, std::uint64_t seed,
                                       const MelConfig& mel) {
  if (task.n_classes < 2 || !task.synthesize) throw InvalidConfig("task '" + task.name + "' has no generator");
  if (examples_per_class <= 0) throw InvalidConfig("examples_per_class must be positive");
  mel.validate(task.sample_rate);

  const auto total = static_cast<std::size_t>(examples_per_class) * static_cast<std::size_t>(task.n_classes);
  std::vector<Example> out(total);
  parallel_for(total, [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    const int label = static_cast<int>(i % static_cast<std::size_t>(task.n_classes));
    const Waveform w = instance_normalize(task.synthesize(label, rng));
    Eigen::MatrixXd values = mel_spectrogram(w, mel).values;
    values.array() -= values.mean();
    out[i] = {std::move(values), label};
  });
  return out;
}

TrainReport train(const ToyTask& task, const TrainConfig& cfg, int examples_per_class, const MelConfig& mel) {
  const auto examples = generate_examples(task, examples_per_class, cfg.seed, mel);
  return train(examples, task.n_classes, cfg, task.name);
}

}  // namespace strfkit
