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

#pragma once

#include <cstddef>
#include <vector>

#include "dpfilter/types.hpp"

namespace dpfilter {

// Matrix-valued samples at w_q = q*pi/N, q = 0..N. Values at negative
// frequencies are the conjugates (real-coefficient systems), so the grid
// also describes the full 2N-point circle.
class SpectrumGrid {
 public:
  SpectrumGrid() = default;
  SpectrumGrid(std::size_t n, Eigen::Index rows, Eigen::Index cols);

  std::size_t n() const { return n_; }
  std::size_t size() const { return samples_.size(); }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  double omega(std::size_t q) const;

  CMat& operator[](std::size_t q) { return samples_[q]; }
  const CMat& operator[](std::size_t q) const { return samples_[q]; }

  // Sample q of the 2N-point circle, q in [0, 2N).
  CMat circle(std::size_t q) const;

  // Entry (r, c) on the full circle, 2N values.
  CVec circle_entry(Eigen::Index r, Eigen::Index c) const;

  SpectrumGrid adjoint() const;

 private:
  std::size_t n_ = 0;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<CMat> samples_;
};

SpectrumGrid operator*(const SpectrumGrid& a, const SpectrumGrid& b);
SpectrumGrid operator+(const SpectrumGrid& a, const SpectrumGrid& b);
SpectrumGrid operator-(const SpectrumGrid& a, const SpectrumGrid& b);
SpectrumGrid operator*(double s, const SpectrumGrid& a);

// Trapezoid weights on the half grid; they sum to one, so sum_q w_q f_q is
// the mean of an even function over the unit circle.
Vec trapezoid_weights(std::size_t n);
double grid_mean(const Vec& values);

// Real inverse transform over the full circle. Element k holds lag k for
// k < N and lag k - 2N for k >= N.
std::vector<Mat> inverse_transform(const SpectrumGrid& grid);

// Forward transform of real lag-indexed matrices laid out as above.
SpectrumGrid forward_transform(const std::vector<Mat>& circular_taps,
                               std::size_t n);

// Plain complex FFT helpers (forward: sum x_k e^{-j 2 pi q k / n}).
CVec fft(const CVec& x);
CVec ifft(const CVec& x);

// Linear convolution y_t = sum_n h[n] x[t - start - n], truncated to the
// length of x.
Vec convolve(const Vec& x, const Vec& h, int start = 0);

}  // namespace dpfilter
