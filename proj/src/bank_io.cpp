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

#include "strfkit/bank_io.hpp"

#include <fstream>

#include "strfkit/error.hpp"

namespace strfkit {

using nlohmann::json;

json bank_to_json(const FilterBank& bank) {
  json filters = json::array();
  for (const auto& p : bank.filters)
    filters.push_back({{"sigma_t", p.sigma_t}, {"sigma_f", p.sigma_f}, {"F", p.F}, {"gamma", p.gamma}});
  return {
      {"schema_version", kBankSchemaVersion},
      {"grid", {{"n_time", bank.grid.n_time}, {"n_freq", bank.grid.n_freq}}},
      {"frame_rate", bank.rates.frame_rate},
      {"channels_per_octave", bank.rates.channels_per_octave},
      {"filters", std::move(filters)},
  };
}

FilterBank bank_from_json(const json& doc) {
  try {
    if (doc.contains("schema_version") && doc.at("schema_version").get<int>() > kBankSchemaVersion)
      throw InvalidInput("filter bank schema_version is newer than this build understands");
    FilterBank bank;
    bank.grid.n_time = doc.at("grid").at("n_time").get<int>();
    bank.grid.n_freq = doc.at("grid").at("n_freq").get<int>();
    bank.rates.frame_rate = doc.at("frame_rate").get<double>();
    bank.rates.channels_per_octave = doc.at("channels_per_octave").get<double>();
    for (const auto& f : doc.at("filters")) {
      bank.filters.push_back({
          .sigma_t = f.at("sigma_t").get<double>(),
          .sigma_f = f.at("sigma_f").get<double>(),
          .F = f.at("F").get<double>(),
          .gamma = f.at("gamma").get<double>(),
      });
    }
    bank.grid.validate();
    bank.rates.validate();
    return bank;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed filter bank: ") + e.what());
  } catch (const InvalidConfig& e) {
    throw InvalidInput(std::string("malformed filter bank: ") + e.what());
  }
}

FilterBank read_bank(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IOError(path, "cannot open filter bank");
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& e) {
    throw IOError(path, e.what());
  }
  try {
    return bank_from_json(doc);
  } catch (const InvalidInput& e) {
    throw IOError(path, e.what());
  }
}

void write_bank(const std::string& path, const FilterBank& bank, const json& manifest) {
  json doc = bank_to_json(bank);
  if (!manifest.is_null()) doc["manifest"] = manifest;
  std::ofstream os(path);
  if (!os) throw IOError(path, "cannot open for writing");
  os << doc.dump(2) << "\n";
  if (!os) throw IOError(path, "write failed");
}

}  // namespace strfkit
