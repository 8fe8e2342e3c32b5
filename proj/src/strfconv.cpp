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

#include "strfkit/strfconv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "binio.hpp"
#include "fft.hpp"
#include "strfkit/error.hpp"
#include "strfkit/parallel.hpp"

namespace strfkit {

using cplx = std::complex<double>;

namespace {
constexpr std::array<char, 4> kFeatureMagic{'S', 'T', 'R', 'Z'};
constexpr std::uint16_t kFeatureVersion = 1;
}  // namespace

std::string to_string(OutputMode mode) {
  switch (mode) {
    case OutputMode::kReal: return "real";
    case OutputMode::kImag: return "imag";
    case OutputMode::kMagnitude: return "magnitude";
    case OutputMode::kConcatReIm: return "concat";
  }
  return "unknown";
}

std::optional<OutputMode> parse_output_mode(const std::string& s) {
  for (auto m : {OutputMode::kReal, OutputMode::kImag, OutputMode::kMagnitude, OutputMode::kConcatReIm})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

Eigen::MatrixXcd convolve_same_direct(const Eigen::MatrixXd& y, const ComplexKernel& kernel) {
  const auto n_t = static_cast<int>(y.rows());
  const auto n_m = static_cast<int>(y.cols());
  const int ht = kernel.half_time(), hf = kernel.half_freq();
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(n_t, n_m);
  for (int t = 0; t < n_t; ++t) {
    const int a_lo = std::max(-ht, t - n_t + 1), a_hi = std::min(ht, t);
    for (int f = 0; f < n_m; ++f) {
      const int b_lo = std::max(-hf, f - n_m + 1), b_hi = std::min(hf, f);
      cplx acc{};
      for (int a = a_lo; a <= a_hi; ++a)
        for (int b = b_lo; b <= b_hi; ++b) acc += kernel.values(b + hf, a + ht) * y(t - a, f - b);
      z(t, f) = acc;
    }
  }
  return z;
}

struct FftConvolver::Impl {
  int n_t, n_m, ht, hf;
  detail::Dft2d dft;
  detail::ComplexBuffer y_hat;

  Impl(const Eigen::MatrixXd& y, const KernelGrid& grid)
      : n_t(static_cast<int>(y.rows())),
        n_m(static_cast<int>(y.cols())),
        ht(grid.half_time()),
        hf(grid.half_freq()),
        dft(detail::good_fft_size(n_t + 2 * ht), detail::good_fft_size(n_m + 2 * hf)),
        y_hat(dft.size()) {
    const int lf = dft.cols();
    for (int t = 0; t < n_t; ++t)
      for (int f = 0; f < n_m; ++f) y_hat[static_cast<std::size_t>(t) * lf + f] = y(t, f);
    dft.forward(y_hat);
  }
};

FftConvolver::FftConvolver(const Eigen::MatrixXd& y, const KernelGrid& grid) {
  grid.validate();
  if (y.rows() < 1 || y.cols() < 1) throw InvalidInput("FftConvolver: empty input");
  impl_ = std::make_unique<Impl>(y, grid);
}

FftConvolver::~FftConvolver() = default;
FftConvolver::FftConvolver(FftConvolver&&) noexcept = default;
FftConvolver& FftConvolver::operator=(FftConvolver&&) noexcept = default;

Eigen::MatrixXcd FftConvolver::convolve(const ComplexKernel& kernel) const {
  const Impl& s = *impl_;
  if (kernel.half_time() != s.ht || kernel.half_freq() != s.hf)
    throw InvalidInput("FftConvolver: kernel extent differs from the planned grid");
  const int lf = s.dft.cols();
  detail::ComplexBuffer buf(s.dft.size());
  for (Eigen::Index j = 0; j < kernel.values.cols(); ++j)
    for (Eigen::Index i = 0; i < kernel.values.rows(); ++i)
      buf[static_cast<std::size_t>(j) * lf + i] = kernel.values(i, j);
  s.dft.forward(buf);
  for (std::size_t n = 0; n < buf.size(); ++n) buf[n] *= s.y_hat[n];
  s.dft.inverse(buf);

  const double scale = 1.0 / static_cast<double>(s.dft.size());
  Eigen::MatrixXcd z(s.n_t, s.n_m);
  for (int t = 0; t < s.n_t; ++t)
    for (int f = 0; f < s.n_m; ++f)
      z(t, f) = buf[static_cast<std::size_t>(t + s.ht) * lf + (f + s.hf)] * scale;
  return z;
}

ComplexKernel FftConvolver::correlate(const Eigen::MatrixXcd& upstream) const {
  const Impl& s = *impl_;
  if (upstream.rows() != s.n_t || upstream.cols() != s.n_m)
    throw InvalidInput("FftConvolver: upstream gradient shape mismatch");
  const int lt = s.dft.rows(), lf = s.dft.cols();
  detail::ComplexBuffer buf(s.dft.size());
  for (int t = 0; t < s.n_t; ++t)
    for (int f = 0; f < s.n_m; ++f) buf[static_cast<std::size_t>(t) * lf + f] = upstream(t, f);
  s.dft.forward(buf);
  for (std::size_t n = 0; n < buf.size(); ++n) buf[n] *= std::conj(s.y_hat[n]);
  s.dft.inverse(buf);

  const double scale = 1.0 / static_cast<double>(s.dft.size());
  ComplexKernel h;
  h.values.resize(2 * s.hf + 1, 2 * s.ht + 1);
  for (int a = -s.ht; a <= s.ht; ++a) {
    const int r = (a + lt) % lt;
    for (int b = -s.hf; b <= s.hf; ++b) {
      const int c = (b + lf) % lf;
      h.values(b + s.hf, a + s.ht) = buf[static_cast<std::size_t>(r) * lf + c] * scale;
    }
  }
  return h;
}

FeatureMap apply_bank(const MelSpectrogram& y, std::span<const GaborParams> bank,
                      const KernelGrid& grid, ConvPath path) {
  grid.validate();
  if (bank.empty()) throw InvalidInput("apply_bank: empty filter bank");
  if (y.n_frames() < 1) throw InvalidInput("apply_bank: spectrogram has no frames");
  if (y.n_mels() < grid.n_freq) throw InvalidInput("apply_bank: fewer mel channels than kernel rows");

  const long work = static_cast<long>(grid.n_time) * grid.n_freq * static_cast<long>(y.n_frames());
  const bool use_fft = path == ConvPath::kFft || (path == ConvPath::kAuto && work > kFftCrossover);

  std::optional<FftConvolver> conv;
  if (use_fft) conv.emplace(y.values, grid);

  FeatureMap z;
  z.slabs.resize(bank.size());
  parallel_for(bank.size(), [&](std::size_t k) {
    const ComplexKernel kernel = gabor_kernel(bank[k], grid);
    z.slabs[k] = use_fft ? conv->convolve(kernel) : convolve_same_direct(y.values, kernel);
  });
  return z;
}

RealTensor project(const FeatureMap& z, OutputMode mode) {
  RealTensor out;
  out.n_frames = z.n_frames();
  out.n_channels = z.n_mels() * parts_per_value(mode);
  out.n_filters = static_cast<Eigen::Index>(z.n_filters());
  out.data.assign(static_cast<std::size_t>(out.n_frames * out.n_channels * out.n_filters), 0.0);
  const Eigen::Index m = z.n_mels();
  for (Eigen::Index k = 0; k < out.n_filters; ++k) {
    const auto& slab = z.slabs[static_cast<std::size_t>(k)];
    for (Eigen::Index t = 0; t < out.n_frames; ++t) {
      for (Eigen::Index f = 0; f < m; ++f) {
        const cplx v = slab(t, f);
        switch (mode) {
          case OutputMode::kReal: out(t, f, k) = v.real(); break;
          case OutputMode::kImag: out(t, f, k) = v.imag(); break;
          case OutputMode::kMagnitude: out(t, f, k) = std::abs(v); break;
          case OutputMode::kConcatReIm:
            out(t, f, k) = v.real();
            out(t, f + m, k) = v.imag();
            break;
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd contract(const FeatureMap& z, OutputMode mode) {
  const RealTensor x = project(z, mode);
  const int parts = parts_per_value(mode);
  const Eigen::Index m = z.n_mels();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.n_frames, parts * x.n_filters);
  for (Eigen::Index t = 0; t < x.n_frames; ++t)
    for (int p = 0; p < parts; ++p)
      for (Eigen::Index k = 0; k < x.n_filters; ++k) {
        double acc = 0.0;
        for (Eigen::Index f = 0; f < m; ++f) acc += x(t, p * m + f, k);
        out(t, p * x.n_filters + k) = acc / static_cast<double>(m);
      }
  return out;
}

void write_feature_binary(std::ostream& os, const RealTensor& x, OutputMode mode) {
  os.write(kFeatureMagic.data(), kFeatureMagic.size());
  detail::put<std::uint16_t>(os, kFeatureVersion);
  detail::put<std::uint16_t>(os, static_cast<std::uint16_t>(mode));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(x.n_frames));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(x.n_channels));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(x.n_filters));
  for (double v : x.data) detail::put<float>(os, static_cast<float>(v));
  if (!os) throw Error("write_feature_binary: stream error");
}

RealTensor read_feature_binary(std::istream& is, OutputMode* mode) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kFeatureMagic)
    throw InvalidInput("not an STRZ feature file (bad magic)");
  if (detail::get<std::uint16_t>(is) != kFeatureVersion) throw InvalidInput("unsupported STRZ version");
  const auto m = detail::get<std::uint16_t>(is);
  if (m > static_cast<std::uint16_t>(OutputMode::kConcatReIm)) throw InvalidInput("unknown STRZ output mode");
  if (mode != nullptr) *mode = static_cast<OutputMode>(m);
  RealTensor x;
  x.n_frames = detail::get<std::uint32_t>(is);
  x.n_channels = detail::get<std::uint32_t>(is);
  x.n_filters = detail::get<std::uint32_t>(is);
  x.data.resize(static_cast<std::size_t>(x.n_frames * x.n_channels * x.n_filters));
  for (auto& v : x.data) v = detail::get<float>(is);
  return x;
}

void write_feature_csv(std::ostream& os, const RealTensor& x, Eigen::Index k) {
  if (k < 0 || k >= x.n_filters) throw InvalidInput("write_feature_csv: filter index out of range");
  os << std::setprecision(9);
  os << "frame";
  for (Eigen::Index c = 0; c < x.n_channels; ++c) os << ",ch" << c;
  os << "\n";
  for (Eigen::Index t = 0; t < x.n_frames; ++t) {
    os << t;
    for (Eigen::Index c = 0; c < x.n_channels; ++c) os << ',' << x(t, c, k);
    os << "\n";
  }
}

}  // namespace strfkit
