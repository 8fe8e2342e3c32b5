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

#include "strfkit/gaborkit.hpp"

#include <algorithm>
#include <cmath>

#include "strfkit/error.hpp"

namespace strfkit {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void KernelGrid::validate() const {
  if (n_time <= 0 || n_freq <= 0 || n_time % 2 == 0 || n_freq % 2 == 0)
    throw InvalidConfig("kernel grid extents must be odd and positive");
}

std::vector<int> KernelGrid::t_coords() const {
  std::vector<int> c(n_time);
  for (int i = 0; i < n_time; ++i) c[i] = i - half_time();
  return c;
}

std::vector<int> KernelGrid::f_coords() const {
  std::vector<int> c(n_freq);
  for (int i = 0; i < n_freq; ++i) c[i] = i - half_freq();
  return c;
}

void ConversionRates::validate() const {
  if (!(frame_rate > 0.0) || !(channels_per_octave > 0.0))
    throw InvalidConfig("conversion rates must be positive");
}

ComplexKernel gabor_kernel(const GaborParams& p, const KernelGrid& g) {
  g.validate();
  const double st = std::max(p.sigma_t, kSigmaMin);
  const double sf = std::max(p.sigma_f, kSigmaMin);
  const double norm = 1.0 / (kTwoPi * st * sf);
  const double ct = std::cos(p.gamma), sg = std::sin(p.gamma);
  const int ht = g.half_time(), hf = g.half_freq();

  ComplexKernel k;
  k.values.resize(g.n_freq, g.n_time);
  for (int i = 0; i < g.n_freq; ++i) {
    const double f = i - hf;
    for (int j = 0; j < g.n_time; ++j) {
      const double t = j - ht;
      const double envelope = norm * std::exp(-0.5 * (t * t / (st * st) + f * f / (sf * sf)));
      const double phase = kTwoPi * p.F * (t * ct + f * sg);
      k.values(i, j) = std::polar(envelope, phase);
    }
  }
  return k;
}

KernelGradients gabor_gradients(const GaborParams& p, const KernelGrid& g) {
  const ComplexKernel k = gabor_kernel(p, g);
  const double st = std::max(p.sigma_t, kSigmaMin);
  const double sf = std::max(p.sigma_f, kSigmaMin);
  const bool st_free = p.sigma_t >= kSigmaMin;
  const bool sf_free = p.sigma_f >= kSigmaMin;
  const double ct = std::cos(p.gamma), sg = std::sin(p.gamma);
  const int ht = g.half_time(), hf = g.half_freq();

  KernelGradients d;
  for (auto* m : {&d.d_sigma_t, &d.d_sigma_f, &d.d_F, &d.d_gamma}) m->values.resize(g.n_freq, g.n_time);
  for (int i = 0; i < g.n_freq; ++i) {
    const double f = i - hf;
    for (int j = 0; j < g.n_time; ++j) {
      const double t = j - ht;
      const cplx v = k.values(i, j);
      d.d_sigma_t.values(i, j) = st_free ? v * (t * t / (st * st * st) - 1.0 / st) : cplx{};
      d.d_sigma_f.values(i, j) = sf_free ? v * (f * f / (sf * sf * sf) - 1.0 / sf) : cplx{};
      d.d_F.values(i, j) = v * cplx(0.0, kTwoPi * (t * ct + f * sg));
      d.d_gamma.values(i, j) = v * cplx(0.0, kTwoPi * p.F * (-t * sg + f * ct));
    }
  }
  return d;
}

ModulationPoint to_cartesian(const GaborParams& p, const ConversionRates& rates) {
  rates.validate();
  return {
      .omega = p.F * std::cos(p.gamma) * rates.frame_rate,
      .Omega = p.F * std::sin(p.gamma) * rates.channels_per_octave,
      .sigma_t_s = p.sigma_t / rates.frame_rate,
      .sigma_f_oct = p.sigma_f / rates.channels_per_octave,
  };
}

GaborParams from_cartesian(const ModulationPoint& m, const ConversionRates& rates) {
  rates.validate();
  const double u = m.omega / rates.frame_rate;
  const double v = m.Omega / rates.channels_per_octave;
  return {
      .sigma_t = m.sigma_t_s * rates.frame_rate,
      .sigma_f = m.sigma_f_oct * rates.channels_per_octave,
      .F = std::hypot(u, v),
      .gamma = std::atan2(v, u),
  };
}

ModulationPoint canonicalize(const ModulationPoint& m) {
  if (m.Omega >= 0.0) return m;
  ModulationPoint out = m;
  out.omega = -m.omega;
  out.Omega = -m.Omega;
  return out;
}

std::vector<ModulationPoint> to_modulation_points(const std::vector<GaborParams>& bank,
                                                  const ConversionRates& rates, bool canonical) {
  std::vector<ModulationPoint> pts;
  pts.reserve(bank.size());
  for (const auto& p : bank) {
    const auto m = to_cartesian(p, rates);
    pts.push_back(canonical ? canonicalize(m) : m);
  }
  return pts;
}

}  // namespace strfkit
