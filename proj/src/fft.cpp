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

#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <new>
#include <tuple>

namespace strfkit::detail {
namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// kind: 0 = c2c forward, 1 = c2c inverse, 2 = r2c
using PlanKey = std::tuple<int, int, int>;

fftw_plan cached_plan(const PlanKey& key) {
  static std::map<PlanKey, fftw_plan> cache;
  std::lock_guard lock(plan_mutex());
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const auto [kind, n0, n1] = key;
  fftw_plan plan = nullptr;
  if (kind == 2) {
    RealBuffer in(static_cast<std::size_t>(n0));
    ComplexBuffer out(static_cast<std::size_t>(n0 / 2 + 1));
    plan = fftw_plan_dft_r2c_1d(n0, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  } else {
    ComplexBuffer buf(static_cast<std::size_t>(n0) * n1);
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    plan = fftw_plan_dft_2d(n0, n1, p, p, kind == 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::bad_alloc();
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

void FftwDeleter::operator()(void* p) const { fftw_free(p); }

ComplexBuffer::ComplexBuffer(std::size_t n)
    : data_(static_cast<cplx*>(fftw_malloc(sizeof(cplx) * std::max<std::size_t>(n, 1)))),
      size_(n) {
  if (!data_) throw std::bad_alloc();
  zero();
}

void ComplexBuffer::zero() { std::fill_n(data_.get(), size_, cplx{}); }

RealBuffer::RealBuffer(std::size_t n)
    : data_(static_cast<double*>(fftw_malloc(sizeof(double) * std::max<std::size_t>(n, 1)))),
      size_(n) {
  if (!data_) throw std::bad_alloc();
  std::fill_n(data_.get(), size_, 0.0);
}

Dft2d::Dft2d(int rows, int cols)
    : rows_(rows),
      cols_(cols),
      forward_plan_(cached_plan({0, rows, cols})),
      inverse_plan_(cached_plan({1, rows, cols})) {}

void Dft2d::forward(ComplexBuffer& buf) const {
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), p, p);
}

void Dft2d::inverse(ComplexBuffer& buf) const {
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), p, p);
}

RealDft1d::RealDft1d(int n) : n_(n), plan_(cached_plan({2, n, 0})) {}

void RealDft1d::forward(RealBuffer& in, ComplexBuffer& out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

int good_fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace strfkit::detail
