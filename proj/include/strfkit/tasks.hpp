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

// Synthetic desk-scale classification tasks.
//
//   chirp-direction  trains of log-frequency FM sweeps in white noise
//                    (20 dB SNR); class 0 = up-sweeps, class 1 = down-sweeps.
//   speech-like      harmonic complexes (F0 100-200 Hz) with syllabic
//                    amplitude modulation and slowly gliding formants;
//                    4 classes = {slow, fast syllable rate} x {rising,
//                    falling formants}.
//
// Every example is instance-normalized, turned into a log-mel spectrogram
// and has its global mean removed.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "strfkit/learner.hpp"
#include "strfkit/melfront.hpp"

namespace strfkit {

struct ToyTask {
  std::string name;
  int n_classes = 0;
  std::vector<std::string> class_names;
  double duration = 1.0;  // seconds
  int sample_rate = 16000;
  // Draws one waveform of the given class.
  std::function<Waveform(int label, std::mt19937_64& rng)> synthesize;
};

ToyTask chirp_direction_task();
ToyTask speech_like_task();

// Known names: "chirp-direction", "speech-like". Throws InvalidConfig otherwise.
ToyTask make_task(const std::string& name);
std::vector<std::string> task_names();

// Balanced set: labels cycle 0, 1, ..., n_classes-1. Example i draws from
// its own generator seeded from (seed, i), so sets are reproducible and
// independent of the thread count.
std::vector<Example> generate_examples(const ToyTask& task, int examples_per_class, std::uint64_t seed,
                                       const MelConfig& mel = {});

// Generates the training set (seeded by cfg.seed) and runs train().
TrainReport train(const ToyTask& task, const TrainConfig& cfg, int examples_per_class = 64,
                  const MelConfig& mel = {});

}  // namespace strfkit
