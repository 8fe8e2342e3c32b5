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
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "strfkit/error.hpp"
#include "strfkit/melfront.hpp"
#include "strfkit/wav.hpp"
#include "test_util.hpp"

using namespace strfkit;
using strfkit::testing::make_rng;
using strfkit::testing::uniform;

namespace {

Waveform noise(std::uint64_t seed, std::size_t n, int sr = 16000) {
  auto rng = make_rng(seed);
  Waveform w{.samples = std::vector<double>(n), .sample_rate = sr};
  for (auto& x : w.samples) x = uniform(rng, -1.0, 1.0) * 0.3 + 0.1;
  return w;
}

// Unit-variance Gaussian noise.
Waveform unit_noise(std::uint64_t seed, std::size_t n, int sr = 16000) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Waveform w{.samples = std::vector<double>(n), .sample_rate = sr};
  for (auto& x : w.samples) x = gauss(rng);
  return w;
}

Waveform tone(double hz, double seconds, int sr = 16000) {
  Waveform w{.samples = std::vector<double>(static_cast<std::size_t>(seconds * sr)), .sample_rate = sr};
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / sr);
  return w;
}

}  // namespace

TEST_SUITE("melfront") {

TEST_CASE("instance_normalize two-point case") {
  const auto out = instance_normalize({.samples = {1.0, 3.0}, .sample_rate = 16000}, 1e-5);
  const double expected = 1.0 / std::sqrt(1.0 + 1e-5);
  CHECK(out.samples[0] == doctest::Approx(-expected).epsilon(1e-14));
  CHECK(out.samples[1] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(out.samples[1] == doctest::Approx(0.999995).epsilon(1e-6));
}

TEST_CASE("instance_normalize constant input maps to zeros") {
  const auto out = instance_normalize({.samples = {5.0, 5.0, 5.0}, .sample_rate = 16000});
  for (double x : out.samples) CHECK(x == 0.0);
}

TEST_CASE("instance_normalize empty input") {
  CHECK_THROWS_AS(instance_normalize(Waveform{}), InvalidInput);
}

TEST_CASE("instance_normalize moments on a random excerpt") {
  const auto out = instance_normalize(unit_noise(7, 16000));
  double mean = 0.0;
  for (double x : out.samples) mean += x;
  mean /= static_cast<double>(out.samples.size());
  double var = 0.0;
  for (double x : out.samples) var += (x - mean) * (x - mean);
  var /= static_cast<double>(out.samples.size());
  CHECK(std::abs(mean) < 1e-9);
  CHECK(var >= 0.9999);
  CHECK(var <= 1.0001);
  CHECK(out.sample_rate == 16000);
  CHECK(out.samples.size() == 16000);
}

TEST_CASE("instance_normalize is idempotent") {
  // A second pass rescales by about 1 + eps * (1 - 1/var) / 2, so the 1e-6
  // bound applies to excerpts whose variance is already near one.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto once = instance_normalize(unit_noise(seed, 4000));
    const auto twice = instance_normalize(once);
    double worst = 0.0;
    for (std::size_t i = 0; i < once.samples.size(); ++i)
      worst = std::max(worst, std::abs(once.samples[i] - twice.samples[i]));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("mel centers match the closed-form mel scale") {
  const MelConfig cfg;
  const auto centers = mel_center_frequencies(cfg);
  REQUIRE(centers.size() == 64);
  const double top = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
  for (int i = 0; i < 64; ++i) {
    const double mel = top * (i + 1) / 65.0;  // 66 uniform points, interior 64
    const double hz = 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
    CHECK(centers[i] == doctest::Approx(hz).epsilon(1e-12));
  }
}

TEST_CASE("mel filterbank rows are triangular and ordered") {
  const MelConfig cfg;
  const Eigen::MatrixXd fb = mel_filterbank_matrix(cfg, 16000);
  REQUIRE(fb.rows() == 64);
  REQUIRE(fb.cols() == 257);
  const auto centers = mel_center_frequencies(cfg);
  for (int m = 0; m < 64; ++m) {
    CHECK(centers[m] > 0.0);
    CHECK(centers[m] < 8000.0);
    if (m > 0) CHECK(centers[m] > centers[m - 1]);
    CHECK(fb.row(m).minCoeff() >= 0.0);
    CHECK(fb.row(m).maxCoeff() > 0.0);

    // exactly one strict local maximum, with no rise after the fall begins
    int peaks = 0;
    bool falling = false;
    bool monotone = true;
    for (int k = 1; k < fb.cols(); ++k) {
      if (fb(m, k) < fb(m, k - 1)) falling = true;
      if (falling && fb(m, k) > fb(m, k - 1)) monotone = false;
      const double left = fb(m, k - 1);
      const double right = k + 1 < fb.cols() ? fb(m, k + 1) : 0.0;
      if (fb(m, k) > left && fb(m, k) >= right) ++peaks;
    }
    CHECK(peaks == 1);
    CHECK(monotone);

    // the peak bin is one of the two bins bracketing the center
    Eigen::Index arg;
    fb.row(m).maxCoeff(&arg);
    CHECK(std::abs(static_cast<double>(arg) * 16000.0 / 512.0 - centers[m]) < 16000.0 / 512.0);
  }
}

TEST_CASE("mel filterbank rejects f_max above Nyquist") {
  MelConfig cfg;
  cfg.f_max = 9000.0;
  CHECK_THROWS_AS(mel_filterbank_matrix(cfg, 16000), InvalidConfig);
  cfg.f_max = 8000.0;
  CHECK_THROWS_AS(mel_filterbank_matrix(cfg, 11025), InvalidConfig);
  MelConfig bad;
  bad.hop_length = 0.05;
  CHECK_THROWS_AS(bad.validate(16000), InvalidConfig);
  bad = MelConfig{};
  bad.n_mels = 1;
  CHECK_THROWS_AS(bad.validate(16000), InvalidConfig);
}

TEST_CASE("mel_spectrogram frame count and rate") {
  const auto mel = mel_spectrogram(noise(1, 18160), MelConfig{});  // 1.135 s
  CHECK(mel.n_frames() == 112);
  CHECK(mel.n_mels() == 64);
  CHECK(mel.frame_rate == doctest::Approx(100.0));
  CHECK(mel.mel_centers.size() == 64);
}

TEST_CASE("mel_spectrogram of silence saturates at the floor") {
  const Waveform silent{.samples = std::vector<double>(8000, 0.0), .sample_rate = 16000};
  const auto mel = mel_spectrogram(silent, MelConfig{});
  CHECK((mel.values.array() == std::log(1e-10)).all());
}

TEST_CASE("mel_spectrogram rejects input shorter than one window") {
  const Waveform short_w{.samples = std::vector<double>(399, 0.1), .sample_rate = 16000};
  CHECK_THROWS_AS(mel_spectrogram(short_w, MelConfig{}), InvalidInput);
}

TEST_CASE("pure tone peaks in the channel nearest its frequency") {
  for (double hz : {1000.0, 440.0, 3000.0}) {
    const auto mel = mel_spectrogram(tone(hz, 0.5), MelConfig{});
    Eigen::Index arg;
    mel.values.colwise().mean().maxCoeff(&arg);
    Eigen::Index nearest = 0;
    for (Eigen::Index m = 1; m < 64; ++m)
      if (std::abs(mel.mel_centers[m] - hz) < std::abs(mel.mel_centers[nearest] - hz)) nearest = m;
    CHECK_MESSAGE(arg == nearest, "tone " << hz);
  }
}

TEST_CASE("mel_spectrogram is shift covariant at hop granularity") {
  const auto base = noise(3, 8000);
  for (int k : {1, 3, 7}) {
    Waveform delayed = base;
    delayed.samples.insert(delayed.samples.begin(), static_cast<std::size_t>(k * 160), 0.0);
    const auto a = mel_spectrogram(base, MelConfig{});
    const auto b = mel_spectrogram(delayed, MelConfig{});
    REQUIRE(b.n_frames() == a.n_frames() + k);
    const double diff = (b.values.bottomRows(a.n_frames()) - a.values).cwiseAbs().maxCoeff();
    CHECK(diff < 1e-6);
  }
}

TEST_CASE("mel_spectrogram values are finite") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto w = noise(seed, 3000);
    w.samples[100] = 1e6;
    const auto mel = mel_spectrogram(w, MelConfig{});
    CHECK(mel.values.allFinite());
  }
}

TEST_CASE("n_mels plumbs through") {
  MelConfig cfg;
  cfg.n_mels = 32;
  const auto mel = mel_spectrogram(noise(2, 4000), cfg);
  CHECK(mel.n_mels() == 32);
}

TEST_CASE("channels_per_octave is positive and finite") {
  const double cpo = channels_per_octave(MelConfig{});
  CHECK(cpo > 1.0);
  CHECK(cpo < 30.0);
}

TEST_CASE("STRF binary layout") {
  const auto mel = mel_spectrogram(noise(4, 4000), MelConfig{});
  std::stringstream ss;
  write_mel_binary(ss, mel);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "STRF");
  CHECK(bytes.size() == 16 + 4 * 64 + 4 * static_cast<std::size_t>(mel.n_frames()) * 64);

  const auto back = read_mel_binary(ss);
  CHECK(back.n_frames() == mel.n_frames());
  CHECK(back.n_mels() == 64);
  CHECK(back.frame_rate == doctest::Approx(100.0));
  CHECK((back.values - mel.values).cwiseAbs().maxCoeff() < 1e-4);

  std::stringstream bad("XXXX");
  CHECK_THROWS_AS(read_mel_binary(bad), InvalidInput);
}

TEST_CASE("WAV round trip and stereo downmix") {
  strfkit::testing::TempDir dir;
  Waveform w = tone(500.0, 0.1);
  for (auto& x : w.samples) x *= 0.5;

  write_wav(dir.file("f32.wav"), w, WavSampleFormat::kFloat32);
  const auto f = read_wav(dir.file("f32.wav"));
  REQUIRE(f.samples.size() == w.samples.size());
  CHECK(f.sample_rate == 16000);
  for (std::size_t i = 0; i < w.samples.size(); ++i) CHECK(f.samples[i] == doctest::Approx(w.samples[i]).epsilon(1e-6));

  write_wav(dir.file("pcm.wav"), w, WavSampleFormat::kPcm16, 2);
  const auto p = read_wav(dir.file("pcm.wav"));
  REQUIRE(p.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) CHECK(std::abs(p.samples[i] - w.samples[i]) < 1.0 / 32768.0);

  CHECK_THROWS_AS(read_wav(dir.file("missing.wav")), IOError);
  {
    std::ofstream junk(dir.file("junk.wav"));
    junk << "not a wav";
  }
  CHECK_THROWS_AS(read_wav(dir.file("junk.wav")), IOError);
}

}  // TEST_SUITE
