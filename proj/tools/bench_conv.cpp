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

// Times the direct and FFT convolution paths over kernel area x frames to
// place kFftCrossover.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "strfkit/gaborkit.hpp"
#include "strfkit/melfront.hpp"
#include "strfkit/strfconv.hpp"

using namespace strfkit;

namespace {

double seconds_per_call(const MelSpectrogram& y, const std::vector<GaborParams>& bank, const KernelGrid& g,
                        ConvPath path) {
  int reps = 0;
  const auto t0 = std::chrono::steady_clock::now();
  double elapsed = 0.0;
  do {
    const auto z = apply_bank(y, bank, g, path);
    ++reps;
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } while (elapsed < 0.2);
  return elapsed / reps;
}

}  // namespace

int main() {
  std::mt19937_64 rng(0);
  std::normal_distribution<double> n01;
  const std::vector<GaborParams> bank{{.sigma_t = 4.0, .sigma_f = 1.0, .F = 0.2, .gamma = 0.7}};
  std::printf("%6s %6s %6s %10s %12s %12s %s\n", "time", "freq", "frames", "work", "direct_s", "fft_s", "faster");
  for (int frames : {8, 32, 100, 300}) {
    for (auto [nt, nf] : std::vector<std::pair<int, int>>{{3, 3}, {11, 5}, {21, 7}, {51, 9}, {111, 9}}) {
      MelSpectrogram y;
      y.values.resize(frames, 64);
      for (Eigen::Index i = 0; i < y.values.size(); ++i) y.values.data()[i] = n01(rng);
      const KernelGrid g{.n_time = nt, .n_freq = nf};
      const double d = seconds_per_call(y, bank, g, ConvPath::kDirect);
      const double f = seconds_per_call(y, bank, g, ConvPath::kFft);
      std::printf("%6d %6d %6d %10ld %12.3g %12.3g %s\n", nt, nf, frames, static_cast<long>(nt) * nf * frames, d, f,
                  d < f ? "direct" : "fft");
    }
  }
  std::printf("kFftCrossover = %ld\n", kFftCrossover);
  return 0;
}
