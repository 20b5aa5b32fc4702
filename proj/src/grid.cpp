// Copyright 2026 The dpfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpfilter/grid.hpp"

#include <unsupported/Eigen/FFT>

#include "dpfilter/error.hpp"

namespace dpfilter {

namespace {

void require_same_shape(const SpectrumGrid& a, const SpectrumGrid& b) {
  if (a.n() != b.n() || a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "spectrum grids differ in shape");
  }
}

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

}  // namespace

SpectrumGrid::SpectrumGrid(std::size_t n, Eigen::Index rows, Eigen::Index cols)
    : n_(n), rows_(rows), cols_(cols),
      samples_(n + 1, CMat::Zero(rows, cols)) {}

double SpectrumGrid::omega(std::size_t q) const {
  return kPi * static_cast<double>(q) / static_cast<double>(n_);
}

CMat SpectrumGrid::circle(std::size_t q) const {
  if (q <= n_) return samples_[q];
  return samples_[2 * n_ - q].conjugate();
}

CVec SpectrumGrid::circle_entry(Eigen::Index r, Eigen::Index c) const {
  CVec out(2 * n_);
  for (std::size_t q = 0; q <= n_; ++q) out[q] = samples_[q](r, c);
  for (std::size_t q = n_ + 1; q < 2 * n_; ++q) {
    out[q] = std::conj(samples_[2 * n_ - q](r, c));
  }
  return out;
}

SpectrumGrid SpectrumGrid::adjoint() const {
  SpectrumGrid out(n_, cols_, rows_);
  for (std::size_t q = 0; q <= n_; ++q) out[q] = samples_[q].adjoint();
  return out;
}

SpectrumGrid operator*(const SpectrumGrid& a, const SpectrumGrid& b) {
  if (a.n() != b.n() || a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "spectrum product shape");
  }
  SpectrumGrid out(a.n(), a.rows(), b.cols());
  for (std::size_t q = 0; q < a.size(); ++q) out[q] = a[q] * b[q];
  return out;
}

SpectrumGrid operator+(const SpectrumGrid& a, const SpectrumGrid& b) {
  require_same_shape(a, b);
  SpectrumGrid out = a;
  for (std::size_t q = 0; q < a.size(); ++q) out[q] += b[q];
  return out;
}

SpectrumGrid operator-(const SpectrumGrid& a, const SpectrumGrid& b) {
  require_same_shape(a, b);
  SpectrumGrid out = a;
  for (std::size_t q = 0; q < a.size(); ++q) out[q] -= b[q];
  return out;
}

SpectrumGrid operator*(double s, const SpectrumGrid& a) {
  SpectrumGrid out = a;
  for (std::size_t q = 0; q < a.size(); ++q) out[q] *= s;
  return out;
}

Vec trapezoid_weights(std::size_t n) {
  Vec w = Vec::Constant(static_cast<Eigen::Index>(n + 1),
                        1.0 / static_cast<double>(n));
  w[0] *= 0.5;
  w[static_cast<Eigen::Index>(n)] *= 0.5;
  return w;
}

double grid_mean(const Vec& values) {
  const auto n = static_cast<std::size_t>(values.size() - 1);
  return trapezoid_weights(n).dot(values);
}

CVec fft(const CVec& x) {
  std::vector<cplx> in(x.data(), x.data() + x.size());
  std::vector<cplx> out;
  fft_engine().fwd(out, in);
  return Eigen::Map<CVec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

CVec ifft(const CVec& x) {
  std::vector<cplx> in(x.data(), x.data() + x.size());
  std::vector<cplx> out;
  fft_engine().inv(out, in);
  return Eigen::Map<CVec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

std::vector<Mat> inverse_transform(const SpectrumGrid& grid) {
  const std::size_t len = 2 * grid.n();
  std::vector<Mat> taps(len, Mat::Zero(grid.rows(), grid.cols()));
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      const CVec time = ifft(grid.circle_entry(r, c));
      for (std::size_t k = 0; k < len; ++k) taps[k](r, c) = time[k].real();
    }
  }
  return taps;
}

SpectrumGrid forward_transform(const std::vector<Mat>& circular_taps,
                               std::size_t n) {
  if (circular_taps.size() != 2 * n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "forward transform needs 2N lag samples");
  }
  const Eigen::Index rows = circular_taps.front().rows();
  const Eigen::Index cols = circular_taps.front().cols();
  SpectrumGrid out(n, rows, cols);
  CVec time(static_cast<Eigen::Index>(2 * n));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (std::size_t k = 0; k < 2 * n; ++k) time[k] = circular_taps[k](r, c);
      const CVec freq = fft(time);
      for (std::size_t q = 0; q <= n; ++q) out[q](r, c) = freq[q];
    }
  }
  return out;
}

Vec convolve(const Vec& x, const Vec& h, int start) {
  const Eigen::Index len = x.size();
  const Eigen::Index taps = h.size();
  Vec y = Vec::Zero(len);
  if (len == 0 || taps == 0) return y;
  if (taps <= 64 || len <= 64) {
    for (Eigen::Index t = 0; t < len; ++t) {
      double acc = 0.0;
      for (Eigen::Index n = 0; n < taps; ++n) {
        const Eigen::Index src = t - start - n;
        if (src >= 0 && src < len) acc += h[n] * x[src];
      }
      y[t] = acc;
    }
    return y;
  }
  // Full linear convolution z[s] = sum_n h[n] x[s - n]; then y_t = z[t - start].
  std::size_t size = 1;
  while (size < static_cast<std::size_t>(len + taps)) size <<= 1;
  std::vector<double> xa(size, 0.0), ha(size, 0.0), za;
  for (Eigen::Index t = 0; t < len; ++t) xa[t] = x[t];
  for (Eigen::Index n = 0; n < taps; ++n) ha[n] = h[n];
  std::vector<cplx> xf, hf;
  fft_engine().fwd(xf, xa);
  fft_engine().fwd(hf, ha);
  for (std::size_t k = 0; k < xf.size(); ++k) xf[k] *= hf[k];
  fft_engine().inv(za, xf, static_cast<Eigen::Index>(size));
  for (Eigen::Index t = 0; t < len; ++t) {
    const Eigen::Index s = t - start;
    if (s >= 0 && s < len + taps - 1) y[t] = za[static_cast<std::size_t>(s)];
  }
  return y;
}

}  // namespace dpfilter
