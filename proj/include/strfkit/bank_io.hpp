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

// Filter-bank interchange document shared by train, analyze and distance:
//
//   {"schema_version": 1,
//    "grid": {"n_time": 111, "n_freq": 9},
//    "frame_rate": 100.0, "channels_per_octave": 8.5,
//    "filters": [{"sigma_t": .., "sigma_f": .., "F": .., "gamma": ..}, ...],
//    "manifest": {...}}            // optional
//
// Unknown keys are ignored on read.

#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "strfkit/gaborkit.hpp"

namespace strfkit {

inline constexpr int kBankSchemaVersion = 1;

struct FilterBank {
  KernelGrid grid;
  ConversionRates rates;
  std::vector<GaborParams> filters;
};

nlohmann::json bank_to_json(const FilterBank& bank);
// Throws InvalidInput on schema violations.
FilterBank bank_from_json(const nlohmann::json& doc);

FilterBank read_bank(const std::string& path);
void write_bank(const std::string& path, const FilterBank& bank,
                const nlohmann::json& manifest = nullptr);

}  // namespace strfkit
