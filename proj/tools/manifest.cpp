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

#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "strfkit/error.hpp"

namespace strfkit::cli {

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IOError(path, "cannot open for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  std::array<char, 1 << 16> buf{};
  while (is) {
    is.read(buf.data(), buf.size());
    if (is.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  if (is.bad()) throw IOError(path, "read failed while hashing");
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& path : inputs)
    in.push_back({{"path", path},
                  {"bytes", std::filesystem::file_size(path)},
                  {"sha256", sha256_file(path)}});
  nlohmann::json doc = {
      {"schema_version", kManifestSchemaVersion},
      {"tool", "strfkit"},
      {"tool_version", kToolVersion},
      {"command", command},
      {"config", config},
      {"inputs", std::move(in)},
      {"outputs", outputs},
  };
  doc["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return doc;
}

}  // namespace strfkit::cli
