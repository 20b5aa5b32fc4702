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

#include "dpfilter/grid.hpp"
#include "dpfilter/types.hpp"

namespace dpfilter {

inline constexpr double kStabilityMargin = 1e-9;

namespace poly {

// Coefficients are ascending powers of z^-1: c0 + c1 z^-1 + ... + cn z^-n.
// Roots are returned in the z plane; trailing zero coefficients give roots
// at the origin.
std::vector<cplx> roots(const std::vector<double>& c);
std::vector<double> from_roots(const std::vector<cplx>& roots, double gain);
std::vector<double> multiply(const std::vector<double>& a,
                             const std::vector<double>& b);
std::vector<double> add(const std::vector<double>& a,
                        const std::vector<double>& b);
cplx eval(const std::vector<double>& c, cplx z_inv);
double max_root_modulus(const std::vector<double>& c);

}  // namespace poly

// Scalar b(z^-1) / a(z^-1) with a0 = 1.
class RationalFilter {
 public:
  RationalFilter() : num_{0.0}, den_{1.0} {}
  RationalFilter(std::vector<double> numerator,
                 std::vector<double> denominator = {1.0});

  static RationalFilter delay(int k, double gain = 1.0);

  const std::vector<double>& numerator() const { return num_; }
  const std::vector<double>& denominator() const { return den_; }

  // Value at z = e^{j omega}.
  cplx eval(double omega) const;
  bool is_fir() const { return den_.size() == 1; }
  bool is_zero() const;
  bool is_stable() const;
  // Zeros strictly inside the unit circle and nonzero leading coefficient.
  bool is_minimum_phase() const;

  std::vector<double> impulse_response(std::size_t length) const;
  Vec apply(const Vec& input) const;

  RationalFilter operator*(const RationalFilter& other) const;
  RationalFilter operator+(const RationalFilter& other) const;
  RationalFilter scaled(double gain) const;
  // 1 / this; requires a nonzero leading numerator coefficient.
  RationalFilter inverse() const;

  bool operator==(const RationalFilter& other) const = default;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
};

class TransferMatrix {
 public:
  TransferMatrix() = default;
  TransferMatrix(Eigen::Index rows, Eigen::Index cols);

  static TransferMatrix identity(Eigen::Index n);
  static TransferMatrix diagonal(const std::vector<RationalFilter>& entries);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  RationalFilter& operator()(Eigen::Index r, Eigen::Index c) {
    return entries_[static_cast<std::size_t>(r * cols_ + c)];
  }
  const RationalFilter& operator()(Eigen::Index r, Eigen::Index c) const {
    return entries_[static_cast<std::size_t>(r * cols_ + c)];
  }

  CMat eval(double omega) const;
  Mat dc_gain() const;
  bool is_stable() const;
  bool is_diagonal() const;
  TransferMatrix column(Eigen::Index c) const;
  TransferMatrix operator*(const TransferMatrix& other) const;

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<RationalFilter> entries_;
};

struct StateSpace {
  Mat A;
  Mat B;
  Mat C;
  Mat D;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return D.cols(); }
  Eigen::Index outputs() const { return D.rows(); }
  bool is_stable() const;
};

// Matrix FIR filter sum_k taps[k] z^-(start + k). A negative start makes it
// two-sided (non-causal).
struct MatrixFir {
  int start = 0;
  std::vector<Mat> taps;

  Eigen::Index rows() const { return taps.empty() ? 0 : taps.front().rows(); }
  Eigen::Index cols() const { return taps.empty() ? 0 : taps.front().cols(); }
  int last_lag() const { return start + static_cast<int>(taps.size()) - 1; }
  CMat eval(double omega) const;
  // Tap at lag k, zero outside the support.
  Mat at(int lag) const;
};

double spectral_radius(const Mat& a);

SpectrumGrid freq_response(const TransferMatrix& sys, std::size_t n);
SpectrumGrid freq_response(const StateSpace& sys, std::size_t n);
SpectrumGrid freq_response(const MatrixFir& sys, std::size_t n);
SpectrumGrid freq_response(const RationalFilter& sys, std::size_t n);

double h2_norm(const TransferMatrix& sys);
double h2_norm(const StateSpace& sys);
double h2_norm(const RationalFilter& sys);
// Frequency-domain path: sqrt of the trapezoid mean of Tr(G* G).
double h2_norm(const SpectrumGrid& response);

// Solution of A^T P A - P + C^T C = 0 by doubling.
Mat observability_gramian(const StateSpace& sys);

EventStream simulate(const TransferMatrix& sys, const EventStream& input);
EventStream simulate(const StateSpace& sys, const EventStream& input);
EventStream simulate(const MatrixFir& sys, const EventStream& input);

StateSpace realize_state_space(const TransferMatrix& tm);

// Lags [0, length) of the impulse response.
MatrixFir impulse_response(const TransferMatrix& sys, std::size_t length);
MatrixFir impulse_response(const StateSpace& sys, std::size_t length);

// Window [first_lag, last_lag] of the inverse transform of a grid.
MatrixFir taps_from_grid(const SpectrumGrid& grid, int first_lag,
                         int last_lag);

// Number of leading impulse-response samples holding all but `tail` of the
// filter's energy.
std::size_t memory_length(const RationalFilter& f, double tail = 1e-8);

}  // namespace dpfilter
