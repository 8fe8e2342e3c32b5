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

#pragma once

#include <string>

#include "strfkit/melfront.hpp"

namespace strfkit {

enum class WavSampleFormat { kPcm16, kFloat32 };

// Reads RIFF/WAVE with 16-bit PCM or 32-bit IEEE float samples. Multichannel
// input is averaged to mono. Throws IOError on unreadable or unsupported files.
Waveform read_wav(const std::string& path);

void write_wav(const std::string& path, const Waveform& w,
               WavSampleFormat format = WavSampleFormat::kPcm16, int channels = 1);

}  // namespace strfkit
