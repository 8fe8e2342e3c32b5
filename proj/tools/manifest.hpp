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

// Run manifests: the resolved configuration and input digests of one
// command invocation.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace strfkit::cli {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kToolVersion = STRFKIT_VERSION;

// Lowercase hex SHA-256 of a file's bytes. Throws IOError.
std::string sha256_file(const std::string& path);

struct Manifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> inputs{};
  std::vector<std::string> outputs{};
  std::optional<std::uint64_t> seed{};

  nlohmann::json to_json() const;
};

}  // namespace strfkit::cli
