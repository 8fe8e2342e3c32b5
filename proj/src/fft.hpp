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

// Thin RAII layer over FFTW. Plans are created once per shape under a global
// lock and executed through the new-array interface, which FFTW documents as
// thread-safe. All buffers come from fftw_malloc so every execution sees the
// alignment the plan was made with.

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace strfkit::detail {

using cplx = std::complex<double>;

struct FftwDeleter {
  void operator()(void* p) const;
};

class ComplexBuffer {
 public:
  ComplexBuffer() = default;
  explicit ComplexBuffer(std::size_t n);
  cplx* data() { return data_.get(); }
  const cplx* data() const { return data_.get(); }
  std::size_t size() const { return size_; }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }
  void zero();

 private:
  std::unique_ptr<cplx[], FftwDeleter> data_;
  std::size_t size_ = 0;
};

class RealBuffer {
 public:
  RealBuffer() = default;
  explicit RealBuffer(std::size_t n);
  double* data() { return data_.get(); }
  std::size_t size() const { return size_; }
  double& operator[](std::size_t i) { return data_[i]; }

 private:
  std::unique_ptr<double[], FftwDeleter> data_;
  std::size_t size_ = 0;
};

// Unnormalized in-place 2-D complex DFT over a row-major rows x cols array.
class Dft2d {
 public:
  Dft2d(int rows, int cols);
  void forward(ComplexBuffer& buf) const;
  // Unnormalized; callers divide by rows*cols.
  void inverse(ComplexBuffer& buf) const;
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }

 private:
  int rows_, cols_;
  void* forward_plan_;
  void* inverse_plan_;
};

// Real-to-half-complex 1-D DFT of length n (n/2+1 outputs).
class RealDft1d {
 public:
  explicit RealDft1d(int n);
  void forward(RealBuffer& in, ComplexBuffer& out) const;
  int size() const { return n_; }

 private:
  int n_;
  void* plan_;
};

// Smallest integer >= n whose only prime factors are 2, 3, 5 and 7.
int good_fft_size(int n);

}  // namespace strfkit::detail
