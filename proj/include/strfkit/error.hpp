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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strfkit {

// Base of every error raised by the library. Catching this at the CLI
// boundary maps to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class IOError : public Error {
 public:
  IOError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A computation produced a non-finite value. filter_index is the offending
// filter when one can be identified, npos otherwise.
class NumericalError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  explicit NumericalError(const std::string& what, std::size_t filter_index = npos)
      : Error(what), filter_index_(filter_index) {}
  std::size_t filter_index() const { return filter_index_; }

 private:
  std::size_t filter_index_;
};

// Raised when a population statistic is undefined for the given input
// (all mass in the low box, identical KDE points, zero density matrix).
class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

}  // namespace strfkit
