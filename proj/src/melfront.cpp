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

#include "strfkit/melfront.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>

#include "binio.hpp"
#include "fft.hpp"
#include "strfkit/error.hpp"

namespace strfkit {

namespace {
constexpr std::array<char, 4> kMelMagic{'S', 'T', 'R', 'F'};
constexpr std::uint16_t kMelVersion = 1;
}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

int MelConfig::window_samples(int sample_rate) const {
  return static_cast<int>(std::lround(window_length * sample_rate));
}

int MelConfig::hop_samples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_length * sample_rate));
}

int MelConfig::resolved_fft_size(int sample_rate) const {
  if (fft_size > 0) return fft_size;
  return static_cast<int>(std::bit_ceil(static_cast<unsigned>(window_samples(sample_rate))));
}

void MelConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw InvalidConfig("sample_rate must be positive");
  if (n_mels < 2) throw InvalidConfig("n_mels must be >= 2");
  if (!(f_min >= 0.0) || !(f_min < f_max)) throw InvalidConfig("require 0 <= f_min < f_max");
  if (f_max > sample_rate / 2.0) throw InvalidConfig("f_max exceeds the Nyquist frequency");
  if (!(window_length > 0.0) || !(hop_length > 0.0)) throw InvalidConfig("window and hop must be positive");
  if (hop_length > window_length) throw InvalidConfig("hop_length must not exceed window_length");
  if (!(log_floor > 0.0)) throw InvalidConfig("log_floor must be positive");
  if (hop_samples(sample_rate) < 1) throw InvalidConfig("hop shorter than one sample");
  if (fft_size != 0 && fft_size < window_samples(sample_rate))
    throw InvalidConfig("fft_size smaller than the analysis window");
}

Waveform instance_normalize(const Waveform& w, double epsilon) {
  if (w.samples.empty()) throw InvalidInput("instance_normalize: empty waveform");
  if (!(epsilon > 0.0)) throw InvalidConfig("instance_normalize: epsilon must be positive");
  const auto n = static_cast<double>(w.samples.size());
  const double mean = std::accumulate(w.samples.begin(), w.samples.end(), 0.0) / n;
  double var = 0.0;
  for (double x : w.samples) var += (x - mean) * (x - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + epsilon);

  Waveform out{.samples = {}, .sample_rate = w.sample_rate};
  out.samples.reserve(w.samples.size());
  for (double x : w.samples) out.samples.push_back((x - mean) * inv);
  return out;
}

std::vector<double> mel_center_frequencies(const MelConfig& cfg) {
  const double lo = hz_to_mel(cfg.f_min);
  const double hi = hz_to_mel(cfg.f_max);
  const double step = (hi - lo) / (cfg.n_mels + 1);
  std::vector<double> centers(cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m) centers[m] = mel_to_hz(lo + step * (m + 1));
  return centers;
}

Eigen::MatrixXd mel_filterbank_matrix(const MelConfig& cfg, int sample_rate) {
  cfg.validate(sample_rate);
  const int n_fft = cfg.resolved_fft_size(sample_rate);
  const int n_bins = n_fft / 2 + 1;

  std::vector<double> edges(cfg.n_mels + 2);
  edges.front() = cfg.f_min;
  edges.back() = cfg.f_max;
  const auto centers = mel_center_frequencies(cfg);
  std::copy(centers.begin(), centers.end(), edges.begin() + 1);

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / n_fft;
      double w = 0.0;
      if (hz > left && hz <= center) {
        w = (hz - left) / (center - left);
      } else if (hz > center && hz < right) {
        w = (right - hz) / (right - center);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
  cfg.validate(w.sample_rate);
  const int win = cfg.window_samples(w.sample_rate);
  const int hop = cfg.hop_samples(w.sample_rate);
  const int n_fft = cfg.resolved_fft_size(w.sample_rate);
  const auto len = static_cast<long>(w.samples.size());
  if (len < win) throw InvalidInput("mel_spectrogram: waveform shorter than one analysis window");

  const long n_frames = 1 + (len - win) / hop;
  const int n_bins = n_fft / 2 + 1;
  const Eigen::MatrixXd fb = mel_filterbank_matrix(cfg, w.sample_rate);

  // Periodic Hann window.
  std::vector<double> window(win);
  for (int i = 0; i < win; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win);

  const detail::RealDft1d dft(n_fft);
  detail::RealBuffer frame(n_fft);
  detail::ComplexBuffer spectrum(n_bins);
  Eigen::VectorXd power(n_bins);

  MelSpectrogram out;
  out.values.resize(n_frames, cfg.n_mels);
  out.frame_rate = static_cast<double>(w.sample_rate) / hop;
  out.mel_centers = mel_center_frequencies(cfg);

  for (long t = 0; t < n_frames; ++t) {
    const double* src = w.samples.data() + t * hop;
    for (int i = 0; i < win; ++i) frame[i] = src[i] * window[i];
    for (int i = win; i < n_fft; ++i) frame[i] = 0.0;
    dft.forward(frame, spectrum);
    for (int k = 0; k < n_bins; ++k) power[k] = std::norm(spectrum[k]);
    const Eigen::VectorXd energy = fb * power;
    for (int m = 0; m < cfg.n_mels; ++m)
      out.values(t, m) = std::log(std::max(energy[m], cfg.log_floor));
  }
  return out;
}

double channels_per_octave(const MelConfig& cfg) {
  const auto centers = mel_center_frequencies(cfg);
  double log_sum = 0.0;
  for (double c : centers) log_sum += std::log(c);
  const double f_geo = std::exp(log_sum / static_cast<double>(centers.size()));
  // channels per mel * mel per Hz * Hz per octave, all at f_geo
  const double channels_per_mel = (cfg.n_mels + 1) / (hz_to_mel(cfg.f_max) - hz_to_mel(cfg.f_min));
  const double mel_per_hz = 2595.0 / (std::numbers::ln10 * (700.0 + f_geo));
  const double hz_per_octave = f_geo * std::numbers::ln2;
  return channels_per_mel * mel_per_hz * hz_per_octave;
}

void write_mel_binary(std::ostream& os, const MelSpectrogram& mel) {
  os.write(kMelMagic.data(), kMelMagic.size());
  detail::put<std::uint16_t>(os, kMelVersion);
  detail::put<std::uint16_t>(os, static_cast<std::uint16_t>(mel.n_mels()));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(mel.n_frames()));
  detail::put<float>(os, static_cast<float>(mel.frame_rate));
  for (double c : mel.mel_centers) detail::put<float>(os, static_cast<float>(c));
  for (Eigen::Index t = 0; t < mel.n_frames(); ++t)
    for (Eigen::Index m = 0; m < mel.n_mels(); ++m)
      detail::put<float>(os, static_cast<float>(mel.values(t, m)));
  if (!os) throw Error("write_mel_binary: stream error");
}

MelSpectrogram read_mel_binary(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMelMagic)
    throw InvalidInput("not an STRF mel spectrogram (bad magic)");
  const auto version = detail::get<std::uint16_t>(is);
  if (version != kMelVersion) throw InvalidInput("unsupported STRF version " + std::to_string(version));
  const auto n_mels = detail::get<std::uint16_t>(is);
  const auto n_frames = detail::get<std::uint32_t>(is);
  MelSpectrogram mel;
  mel.frame_rate = detail::get<float>(is);
  mel.mel_centers.resize(n_mels);
  for (auto& c : mel.mel_centers) c = detail::get<float>(is);
  mel.values.resize(n_frames, n_mels);
  for (std::uint32_t t = 0; t < n_frames; ++t)
    for (std::uint16_t m = 0; m < n_mels; ++m) mel.values(t, m) = detail::get<float>(is);
  return mel;
}

void write_mel_csv(std::ostream& os, const MelSpectrogram& mel) {
  os << std::setprecision(9);
  os << "# frame_rate=" << mel.frame_rate << "\n";
  os << "frame";
  for (double c : mel.mel_centers) os << ",mel_" << c;
  os << "\n";
  for (Eigen::Index t = 0; t < mel.n_frames(); ++t) {
    os << t;
    for (Eigen::Index m = 0; m < mel.n_mels(); ++m) os << ',' << mel.values(t, m);
    os << "\n";
  }
}

}  // namespace strfkit
