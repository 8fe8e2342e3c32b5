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

// The strfkit command-line surface. Exit codes: 0 success, 1 runtime or
// numerical error, 2 usage error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace strfkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct DefaultEntry {
  std::string key;
  std::string value;
  std::string kind;  // "reference" or "tunable"
};

// The single table of numerical defaults shared by all subcommands.
std::vector<DefaultEntry> defaults_table();

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace strfkit::cli
