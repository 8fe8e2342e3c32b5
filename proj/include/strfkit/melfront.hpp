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

// Waveform -> normalized log-mel front end.

#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace strfkit {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

struct MelConfig {
  int n_mels = 64;
  double f_min = 0.0;
  double f_max = 8000.0;
  double window_length = 0.025;  // seconds
  double hop_length = 0.010;     // seconds
  int fft_size = 0;              // 0: next power of two >= window samples
  double log_floor = 1e-10;

  // Throws InvalidConfig when the config is unusable at this sample rate.
  void validate(int sample_rate) const;

  int window_samples(int sample_rate) const;
  int hop_samples(int sample_rate) const;
  int resolved_fft_size(int sample_rate) const;
};

// Log-energy matrix, frames as rows. Row t is the frame starting at sample
// t * hop.
struct MelSpectrogram {
  Eigen::MatrixXd values;  // n_frames x n_mels
  double frame_rate = 100.0;
  std::vector<double> mel_centers;  // Hz, strictly increasing

  Eigen::Index n_frames() const { return values.rows(); }
  Eigen::Index n_mels() const { return values.cols(); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// (x - mean) / sqrt(var + epsilon) with the population variance.
Waveform instance_normalize(const Waveform& w, double epsilon = 1e-5);

// Triangular filters with peaks at n_mels mel-spaced centers; the two
// outermost of the n_mels + 2 mel points are the band edges.
std::vector<double> mel_center_frequencies(const MelConfig& cfg);
Eigen::MatrixXd mel_filterbank_matrix(const MelConfig& cfg, int sample_rate);

// Hann-windowed power STFT -> mel matrix -> log(max(energy, log_floor)).
// The waveform is used as is; normalize beforehand if required.
MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg);

// Local mel-channel density in channels per octave, evaluated at the
// geometric mean of the filter centers. Used to express spectral modulation
// in cycles/octave.
double channels_per_octave(const MelConfig& cfg);

// Compact binary layout (little-endian):
//   "STRF" | u16 version | u16 n_mels | u32 n_frames | f32 frame_rate
//   f32 mel_centers[n_mels] | f32 values[n_frames][n_mels]
void write_mel_binary(std::ostream& os, const MelSpectrogram& mel);
MelSpectrogram read_mel_binary(std::istream& is);
// One frame per row; a header row carries the mel centers.
void write_mel_csv(std::ostream& os, const MelSpectrogram& mel);

}  // namespace strfkit
