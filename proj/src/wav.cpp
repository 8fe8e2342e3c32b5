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

#include "strfkit/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string_view>
#include <vector>

#include "binio.hpp"
#include "strfkit/error.hpp"

namespace strfkit {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::string read_tag(std::istream& is) {
  std::array<char, 4> tag{};
  if (!is.read(tag.data(), tag.size())) return {};
  return {tag.begin(), tag.end()};
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IOError(path, "cannot open WAV file");

  try {
    if (read_tag(is) != "RIFF") throw IOError(path, "not a RIFF file");
    detail::get<std::uint32_t>(is);
    if (read_tag(is) != "WAVE") throw IOError(path, "not a WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    for (;;) {
      const std::string tag = read_tag(is);
      if (tag.empty()) throw IOError(path, "no data chunk");
      const auto size = detail::get<std::uint32_t>(is);
      if (tag == "fmt ") {
        format = detail::get<std::uint16_t>(is);
        channels = detail::get<std::uint16_t>(is);
        rate = detail::get<std::uint32_t>(is);
        detail::get<std::uint32_t>(is);  // byte rate
        detail::get<std::uint16_t>(is);  // block align
        bits = detail::get<std::uint16_t>(is);
        std::uint32_t consumed = 16;
        if (format == kFormatExtensible && size >= 26) {
          detail::get<std::uint16_t>(is);  // cbSize
          detail::get<std::uint16_t>(is);  // valid bits
          detail::get<std::uint32_t>(is);  // channel mask
          format = detail::get<std::uint16_t>(is);  // first two bytes of the subformat GUID
          consumed = 26;
        }
        is.ignore(size - consumed + (size & 1));
        have_fmt = true;
        continue;
      }
      if (tag != "data") {
        is.ignore(size + (size & 1));
        continue;
      }
      if (!have_fmt) throw IOError(path, "data chunk before fmt chunk");
      if (channels == 0) throw IOError(path, "zero channels");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool f32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !f32) throw IOError(path, "unsupported sample format (need 16-bit PCM or 32-bit float)");

      const std::size_t frame_bytes = static_cast<std::size_t>(channels) * bits / 8;
      const std::size_t n_frames = size / frame_bytes;
      std::vector<char> raw(n_frames * frame_bytes);
      if (!is.read(raw.data(), static_cast<std::streamsize>(raw.size())))
        throw IOError(path, "truncated data chunk");

      Waveform w;
      w.sample_rate = static_cast<int>(rate);
      w.samples.resize(n_frames);
      for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
          const char* p = raw.data() + i * frame_bytes + c * (bits / 8);
          if (pcm16) {
            std::int16_t v;
            std::memcpy(&v, p, sizeof v);
            acc += v / 32768.0;
          } else {
            float v;
            std::memcpy(&v, p, sizeof v);
            acc += v;
          }
        }
        w.samples[i] = acc / channels;
      }
      return w;
    }
  } catch (const InvalidInput& e) {
    throw IOError(path, e.what());
  }
}

void write_wav(const std::string& path, const Waveform& w, WavSampleFormat format, int channels) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IOError(path, "cannot open for writing");
  const bool pcm16 = format == WavSampleFormat::kPcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const auto n_channels = static_cast<std::uint16_t>(channels);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(w.samples.size()) * n_channels * (bits / 8);

  os.write("RIFF", 4);
  detail::put<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  detail::put<std::uint32_t>(os, 16);
  detail::put<std::uint16_t>(os, pcm16 ? kFormatPcm : kFormatFloat);
  detail::put<std::uint16_t>(os, n_channels);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(w.sample_rate));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(w.sample_rate) * n_channels * (bits / 8));
  detail::put<std::uint16_t>(os, static_cast<std::uint16_t>(n_channels * (bits / 8)));
  detail::put<std::uint16_t>(os, bits);
  os.write("data", 4);
  detail::put<std::uint32_t>(os, data_bytes);
  for (double x : w.samples) {
    for (int c = 0; c < channels; ++c) {
      if (pcm16) {
        const double clipped = std::clamp(x, -1.0, 32767.0 / 32768.0);
        detail::put<std::int16_t>(os, static_cast<std::int16_t>(std::lround(clipped * 32768.0)));
      } else {
        detail::put<float>(os, static_cast<float>(x));
      }
    }
  }
  if (!os) throw IOError(path, "write failed");
}

}  // namespace strfkit
