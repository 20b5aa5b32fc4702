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

#include "dpfilter/lti.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "dpfilter/error.hpp"

namespace dpfilter {

namespace poly {

std::vector<cplx> roots(const std::vector<double>& c) {
  std::size_t hi = c.size();
  while (hi > 0 && c[hi - 1] == 0.0) --hi;
  std::size_t lo = 0;
  while (lo < hi && c[lo] == 0.0) ++lo;
  std::vector<cplx> out(c.size() - hi, cplx(0.0, 0.0));
  if (hi <= lo + 1) return out;
  const auto n = static_cast<Eigen::Index>(hi - lo - 1);
  Mat companion = Mat::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    companion(0, k) = -c[lo + 1 + static_cast<std::size_t>(k)] / c[lo];
  }
  for (Eigen::Index k = 1; k < n; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Mat> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kFitFailed, "polynomial root finding failed");
  }
  for (Eigen::Index k = 0; k < n; ++k) out.push_back(solver.eigenvalues()[k]);
  return out;
}

std::vector<double> from_roots(const std::vector<cplx>& roots, double gain) {
  std::vector<cplx> acc{cplx(gain, 0.0)};
  for (const cplx& r : roots) {
    std::vector<cplx> next(acc.size() + 1, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < acc.size(); ++k) {
      next[k] += acc[k];
      next[k + 1] -= r * acc[k];
    }
    acc.swap(next);
  }
  std::vector<double> out(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) out[k] = acc[k].real();
  return out;
}

std::vector<double> multiply(const std::vector<double>& a,
                             const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

std::vector<double> add(const std::vector<double>& a,
                        const std::vector<double>& b) {
  std::vector<double> out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

cplx eval(const std::vector<double>& c, cplx z_inv) {
  cplx acc(0.0, 0.0);
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * z_inv + c[k];
  return acc;
}

double max_root_modulus(const std::vector<double>& c) {
  double best = 0.0;
  for (const cplx& r : roots(c)) best = std::max(best, std::abs(r));
  return best;
}

}  // namespace poly

namespace {

void trim(std::vector<double>& c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
}

bool all_finite(const std::vector<double>& c) {
  return std::all_of(c.begin(), c.end(),
                     [](double v) { return std::isfinite(v); });
}

void require_grid(std::size_t n) {
  if (n < 8) {
    throw Error(ErrorCode::kDimensionMismatch, "grid size must be at least 8");
  }
}

std::vector<std::string> output_names(Eigen::Index p) {
  return EventStream::default_names(p, "y");
}

}  // namespace

EventStream::EventStream(Mat data, std::vector<std::string> channel_names)
    : names(std::move(channel_names)), samples(std::move(data)) {
  if (names.empty()) names = default_names(samples.cols(), "u");
  if (static_cast<Eigen::Index>(names.size()) != samples.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "channel name count differs from column count");
  }
}

std::vector<std::string> EventStream::default_names(Eigen::Index channels,
                                                    const std::string& prefix) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < channels; ++i) {
    out.push_back(prefix + std::to_string(i + 1));
  }
  return out;
}

RationalFilter::RationalFilter(std::vector<double> numerator,
                               std::vector<double> denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (num_.empty()) num_ = {0.0};
  if (den_.empty() || den_[0] == 0.0) {
    throw Error(ErrorCode::kImproperTransferFunction,
                "denominator must have a nonzero constant term");
  }
  if (!all_finite(num_) || !all_finite(den_)) {
    throw Error(ErrorCode::kImproperTransferFunction,
                "non-finite filter coefficient");
  }
  const double a0 = den_[0];
  for (double& v : num_) v /= a0;
  for (double& v : den_) v /= a0;
  trim(num_);
  trim(den_);
}

RationalFilter RationalFilter::delay(int k, double gain) {
  std::vector<double> num(static_cast<std::size_t>(k) + 1, 0.0);
  num.back() = gain;
  return RationalFilter(num);
}

cplx RationalFilter::eval(double omega) const {
  const cplx z_inv = std::polar(1.0, -omega);
  return poly::eval(num_, z_inv) / poly::eval(den_, z_inv);
}

bool RationalFilter::is_zero() const {
  return std::all_of(num_.begin(), num_.end(),
                     [](double v) { return v == 0.0; });
}

bool RationalFilter::is_stable() const {
  return is_fir() || poly::max_root_modulus(den_) < 1.0 - kStabilityMargin;
}

bool RationalFilter::is_minimum_phase() const {
  double scale = 0.0;
  for (double v : num_) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || std::abs(num_[0]) <= 1e-14 * scale) return false;
  return poly::max_root_modulus(num_) < 1.0 - kStabilityMargin;
}

std::vector<double> RationalFilter::impulse_response(std::size_t length) const {
  std::vector<double> h(length, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    double acc = t < num_.size() ? num_[t] : 0.0;
    for (std::size_t k = 1; k < den_.size() && k <= t; ++k) {
      acc -= den_[k] * h[t - k];
    }
    h[t] = acc;
  }
  return h;
}

Vec RationalFilter::apply(const Vec& input) const {
  if (is_zero()) return Vec::Zero(input.size());
  if (is_fir()) {
    return convolve(input, Eigen::Map<const Vec>(
                               num_.data(), static_cast<Eigen::Index>(num_.size())));
  }
  // Transposed direct form II.
  const std::size_t order = std::max(num_.size(), den_.size()) - 1;
  std::vector<double> b(order + 1, 0.0), a(order + 1, 0.0);
  std::copy(num_.begin(), num_.end(), b.begin());
  std::copy(den_.begin(), den_.end(), a.begin());
  std::vector<double> state(order + 1, 0.0);
  Vec out(input.size());
  for (Eigen::Index t = 0; t < input.size(); ++t) {
    const double x = input[t];
    const double y = b[0] * x + state[0];
    for (std::size_t k = 0; k + 1 < order; ++k) {
      state[k] = state[k + 1] + b[k + 1] * x - a[k + 1] * y;
    }
    if (order > 0) state[order - 1] = b[order] * x - a[order] * y;
    out[t] = y;
  }
  return out;
}

RationalFilter RationalFilter::operator*(const RationalFilter& other) const {
  if (is_zero() || other.is_zero()) return RationalFilter();
  return RationalFilter(poly::multiply(num_, other.num_),
                        poly::multiply(den_, other.den_));
}

RationalFilter RationalFilter::operator+(const RationalFilter& other) const {
  if (is_zero()) return other;
  if (other.is_zero()) return *this;
  if (den_ == other.den_) return RationalFilter(poly::add(num_, other.num_), den_);
  return RationalFilter(poly::add(poly::multiply(num_, other.den_),
                                  poly::multiply(other.num_, den_)),
                        poly::multiply(den_, other.den_));
}

RationalFilter RationalFilter::scaled(double gain) const {
  std::vector<double> num = num_;
  for (double& v : num) v *= gain;
  return RationalFilter(num, den_);
}

RationalFilter RationalFilter::inverse() const {
  if (num_[0] == 0.0) {
    throw Error(ErrorCode::kImproperTransferFunction,
                "inverse of a filter with a leading delay is not causal");
  }
  return RationalFilter(den_, num_);
}

TransferMatrix::TransferMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols),
      entries_(static_cast<std::size_t>(rows * cols)) {}

TransferMatrix TransferMatrix::identity(Eigen::Index n) {
  TransferMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) out(i, i) = RationalFilter({1.0});
  return out;
}

TransferMatrix TransferMatrix::diagonal(
    const std::vector<RationalFilter>& entries) {
  const auto n = static_cast<Eigen::Index>(entries.size());
  TransferMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) out(i, i) = entries[i];
  return out;
}

CMat TransferMatrix::eval(double omega) const {
  CMat out(rows_, cols_);
  for (Eigen::Index r = 0; r < rows_; ++r) {
    for (Eigen::Index c = 0; c < cols_; ++c) out(r, c) = (*this)(r, c).eval(omega);
  }
  return out;
}

Mat TransferMatrix::dc_gain() const { return eval(0.0).real(); }

bool TransferMatrix::is_stable() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const RationalFilter& f) { return f.is_stable(); });
}

bool TransferMatrix::is_diagonal() const {
  if (rows_ != cols_) return false;
  for (Eigen::Index r = 0; r < rows_; ++r) {
    for (Eigen::Index c = 0; c < cols_; ++c) {
      if (r != c && !(*this)(r, c).is_zero()) return false;
    }
  }
  return true;
}

TransferMatrix TransferMatrix::column(Eigen::Index c) const {
  TransferMatrix out(rows_, 1);
  for (Eigen::Index r = 0; r < rows_; ++r) out(r, 0) = (*this)(r, c);
  return out;
}

TransferMatrix TransferMatrix::operator*(const TransferMatrix& other) const {
  if (cols_ != other.rows_) {
    throw Error(ErrorCode::kDimensionMismatch, "transfer matrix product shape");
  }
  TransferMatrix out(rows_, other.cols_);
  for (Eigen::Index r = 0; r < rows_; ++r) {
    for (Eigen::Index c = 0; c < other.cols_; ++c) {
      RationalFilter acc;
      for (Eigen::Index k = 0; k < cols_; ++k) {
        acc = acc + (*this)(r, k) * other(k, c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

double spectral_radius(const Mat& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Mat> solver(a, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool StateSpace::is_stable() const {
  return spectral_radius(A) < 1.0 - kStabilityMargin;
}

CMat MatrixFir::eval(double omega) const {
  CMat out = CMat::Zero(rows(), cols());
  for (std::size_t k = 0; k < taps.size(); ++k) {
    out += taps[k].cast<cplx>() *
           std::polar(1.0, -omega * (start + static_cast<int>(k)));
  }
  return out;
}

Mat MatrixFir::at(int lag) const {
  const int k = lag - start;
  if (k < 0 || k >= static_cast<int>(taps.size())) return Mat::Zero(rows(), cols());
  return taps[static_cast<std::size_t>(k)];
}

SpectrumGrid freq_response(const TransferMatrix& sys, std::size_t n) {
  require_grid(n);
  if (!sys.is_stable()) {
    throw Error(ErrorCode::kUnstableSystem, "transfer matrix has a pole on or outside the unit circle");
  }
  SpectrumGrid out(n, sys.rows(), sys.cols());
  for (std::size_t q = 0; q <= n; ++q) out[q] = sys.eval(out.omega(q));
  return out;
}

SpectrumGrid freq_response(const RationalFilter& sys, std::size_t n) {
  TransferMatrix tm(1, 1);
  tm(0, 0) = sys;
  return freq_response(tm, n);
}

SpectrumGrid freq_response(const StateSpace& sys, std::size_t n) {
  require_grid(n);
  if (!sys.is_stable()) {
    throw Error(ErrorCode::kUnstableSystem, "state matrix spectral radius >= 1");
  }
  SpectrumGrid out(n, sys.outputs(), sys.inputs());
  const Eigen::Index states = sys.states();
  const CMat a = sys.A.cast<cplx>();
  const CMat b = sys.B.cast<cplx>();
  const CMat c = sys.C.cast<cplx>();
  for (std::size_t q = 0; q <= n; ++q) {
    out[q] = sys.D.cast<cplx>();
    if (states == 0) continue;
    const cplx z = std::polar(1.0, out.omega(q));
    const CMat resolvent = z * CMat::Identity(states, states) - a;
    out[q] += c * resolvent.partialPivLu().solve(b);
  }
  return out;
}

SpectrumGrid freq_response(const MatrixFir& sys, std::size_t n) {
  require_grid(n);
  const std::size_t len = 2 * n;
  std::vector<Mat> circular(len, Mat::Zero(sys.rows(), sys.cols()));
  for (std::size_t k = 0; k < sys.taps.size(); ++k) {
    long lag = static_cast<long>(sys.start) + static_cast<long>(k);
    long idx = lag % static_cast<long>(len);
    if (idx < 0) idx += static_cast<long>(len);
    circular[static_cast<std::size_t>(idx)] += sys.taps[k];
  }
  return forward_transform(circular, n);
}

Mat observability_gramian(const StateSpace& sys) {
  const Eigen::Index n = sys.states();
  if (n == 0) return Mat(0, 0);
  Mat p = sys.C.transpose() * sys.C;
  Mat ak = sys.A;
  for (int it = 0; it < 200; ++it) {
    const Mat inc = ak.transpose() * p * ak;
    p += inc;
    ak = ak * ak;
    if (!p.allFinite() || !ak.allFinite()) break;
    const double scale = p.cwiseAbs().maxCoeff();
    if (inc.cwiseAbs().maxCoeff() <= 1e-12 * scale || ak.isZero(0.0)) {
      return 0.5 * (p + p.transpose());
    }
  }
  throw Error(ErrorCode::kLyapunovFailure,
              "Gramian doubling did not converge; is the system stable?");
}

double h2_norm(const StateSpace& sys) {
  if (!sys.is_stable()) {
    throw Error(ErrorCode::kUnstableSystem, "state matrix spectral radius >= 1");
  }
  double energy = (sys.D.transpose() * sys.D).trace();
  if (sys.states() > 0) {
    const Mat p = observability_gramian(sys);
    energy += (sys.B.transpose() * p * sys.B).trace();
  }
  return std::sqrt(std::max(energy, 0.0));
}

double h2_norm(const RationalFilter& sys) {
  if (sys.is_zero()) return 0.0;
  if (sys.is_fir()) {
    double energy = 0.0;
    for (double v : sys.numerator()) energy += v * v;
    return std::sqrt(energy);
  }
  TransferMatrix tm(1, 1);
  tm(0, 0) = sys;
  return h2_norm(realize_state_space(tm));
}

double h2_norm(const TransferMatrix& sys) {
  double energy = 0.0;
  for (Eigen::Index r = 0; r < sys.rows(); ++r) {
    for (Eigen::Index c = 0; c < sys.cols(); ++c) {
      const RationalFilter& f = sys(r, c);
      if (!f.is_stable()) {
        throw Error(ErrorCode::kUnstableSystem, "unstable transfer matrix entry");
      }
      const double v = h2_norm(f);
      energy += v * v;
    }
  }
  return std::sqrt(energy);
}

double h2_norm(const SpectrumGrid& response) {
  const Vec w = trapezoid_weights(response.n());
  double energy = 0.0;
  for (std::size_t q = 0; q < response.size(); ++q) {
    energy += w[static_cast<Eigen::Index>(q)] * response[q].squaredNorm();
  }
  return std::sqrt(energy);
}

EventStream simulate(const TransferMatrix& sys, const EventStream& input) {
  if (input.channels() != sys.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "stream has " + std::to_string(input.channels()) +
                    " channels, system expects " + std::to_string(sys.cols()));
  }
  Mat out = Mat::Zero(input.steps(), sys.rows());
  for (Eigen::Index r = 0; r < sys.rows(); ++r) {
    for (Eigen::Index c = 0; c < sys.cols(); ++c) {
      if (sys(r, c).is_zero()) continue;
      out.col(r) += sys(r, c).apply(input.samples.col(c));
    }
  }
  EventStream result(std::move(out), output_names(sys.rows()));
  result.dt_label = input.dt_label;
  return result;
}

EventStream simulate(const StateSpace& sys, const EventStream& input) {
  if (input.channels() != sys.inputs()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "stream channel count differs from system inputs");
  }
  Mat out(input.steps(), sys.outputs());
  Vec x = Vec::Zero(sys.states());
  for (Eigen::Index t = 0; t < input.steps(); ++t) {
    const Vec u = input.samples.row(t).transpose();
    out.row(t) = (sys.C * x + sys.D * u).transpose();
    x = sys.A * x + sys.B * u;
  }
  EventStream result(std::move(out), output_names(sys.outputs()));
  result.dt_label = input.dt_label;
  return result;
}

EventStream simulate(const MatrixFir& sys, const EventStream& input) {
  if (input.channels() != sys.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "stream channel count differs from filter inputs");
  }
  Mat out = Mat::Zero(input.steps(), sys.rows());
  Vec h(static_cast<Eigen::Index>(sys.taps.size()));
  for (Eigen::Index r = 0; r < sys.rows(); ++r) {
    for (Eigen::Index c = 0; c < sys.cols(); ++c) {
      for (std::size_t k = 0; k < sys.taps.size(); ++k) h[k] = sys.taps[k](r, c);
      if (h.isZero(0.0)) continue;
      out.col(r) += convolve(input.samples.col(c), h, sys.start);
    }
  }
  EventStream result(std::move(out), output_names(sys.rows()));
  result.dt_label = input.dt_label;
  return result;
}

StateSpace realize_state_space(const TransferMatrix& tm) {
  const Eigen::Index p = tm.rows();
  const Eigen::Index m = tm.cols();
  std::vector<Mat> a_blocks;
  std::vector<Mat> c_blocks;
  Mat d = Mat::Zero(p, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    // Common denominator: product of the distinct denominators in the column.
    std::vector<std::vector<double>> dens;
    for (Eigen::Index i = 0; i < p; ++i) {
      const RationalFilter& f = tm(i, j);
      if (f.is_zero() || f.is_fir()) continue;
      if (std::find(dens.begin(), dens.end(), f.denominator()) == dens.end()) {
        dens.push_back(f.denominator());
      }
    }
    std::vector<double> common{1.0};
    for (const auto& den : dens) common = poly::multiply(common, den);
    std::vector<std::vector<double>> nums(static_cast<std::size_t>(p));
    std::size_t order = common.size() - 1;
    for (Eigen::Index i = 0; i < p; ++i) {
      const RationalFilter& f = tm(i, j);
      std::vector<double> num = f.numerator();
      if (!f.is_zero()) {
        for (const auto& den : dens) {
          if (den != f.denominator()) num = poly::multiply(num, den);
        }
      } else {
        num = {0.0};
      }
      order = std::max(order, num.size() - 1);
      nums[static_cast<std::size_t>(i)] = num;
    }
    common.resize(order + 1, 0.0);
    const auto n = static_cast<Eigen::Index>(order);
    Mat a = Mat::Zero(n, n);
    Mat c = Mat::Zero(p, n);
    for (Eigen::Index k = 0; k < n; ++k) a(0, k) = -common[k + 1];
    for (Eigen::Index k = 1; k < n; ++k) a(k, k - 1) = 1.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      std::vector<double>& num = nums[static_cast<std::size_t>(i)];
      num.resize(order + 1, 0.0);
      d(i, j) = num[0];
      for (Eigen::Index k = 0; k < n; ++k) {
        c(i, k) = num[k + 1] - num[0] * common[k + 1];
      }
    }
    a_blocks.push_back(a);
    c_blocks.push_back(c);
  }
  Eigen::Index total = 0;
  for (const Mat& a : a_blocks) total += a.rows();
  StateSpace ss{Mat::Zero(total, total), Mat::Zero(total, m),
                Mat::Zero(p, total), d};
  Eigen::Index offset = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index n = a_blocks[j].rows();
    if (n == 0) continue;
    ss.A.block(offset, offset, n, n) = a_blocks[j];
    ss.B(offset, j) = 1.0;
    ss.C.block(0, offset, p, n) = c_blocks[j];
    offset += n;
  }
  return ss;
}

MatrixFir impulse_response(const TransferMatrix& sys, std::size_t length) {
  MatrixFir out;
  out.taps.assign(length, Mat::Zero(sys.rows(), sys.cols()));
  for (Eigen::Index r = 0; r < sys.rows(); ++r) {
    for (Eigen::Index c = 0; c < sys.cols(); ++c) {
      const std::vector<double> h = sys(r, c).impulse_response(length);
      for (std::size_t k = 0; k < length; ++k) out.taps[k](r, c) = h[k];
    }
  }
  return out;
}

MatrixFir impulse_response(const StateSpace& sys, std::size_t length) {
  MatrixFir out;
  out.taps.reserve(length);
  Mat ak_b = sys.B;
  for (std::size_t k = 0; k < length; ++k) {
    if (k == 0) {
      out.taps.push_back(sys.D);
    } else {
      out.taps.push_back(sys.C * ak_b);
      ak_b = sys.A * ak_b;
    }
  }
  return out;
}

MatrixFir taps_from_grid(const SpectrumGrid& grid, int first_lag, int last_lag) {
  const std::vector<Mat> circular = inverse_transform(grid);
  const long len = static_cast<long>(circular.size());
  if (last_lag < first_lag || last_lag - first_lag >= len) {
    throw Error(ErrorCode::kDimensionMismatch, "lag window wider than the grid period");
  }
  MatrixFir out;
  out.start = first_lag;
  for (int lag = first_lag; lag <= last_lag; ++lag) {
    long idx = lag % len;
    if (idx < 0) idx += len;
    out.taps.push_back(circular[static_cast<std::size_t>(idx)]);
  }
  return out;
}

std::size_t memory_length(const RationalFilter& f, double tail) {
  if (f.is_zero()) return 0;
  if (!f.is_stable()) {
    throw Error(ErrorCode::kUnstableSystem, "memory of an unstable filter");
  }
  if (f.is_fir()) {
    const std::vector<double>& h = f.numerator();
    double total = 0.0;
    for (double v : h) total += v * v;
    double rest = total;
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (rest <= tail * total) return k;
      rest -= h[k] * h[k];
    }
    return h.size();
  }
  // The energy is read off the impulse response itself; the Gramian route
  // gets slow for the high-order inverses that zero forcing produces.
  std::size_t len = 256;
  constexpr std::size_t kMax = std::size_t{1} << 24;
  while (true) {
    const std::vector<double> h = f.impulse_response(len);
    double total = 0.0;
    double back = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      total += h[k] * h[k];
      if (k >= len / 2) back += h[k] * h[k];
    }
    if (back <= 1e-3 * tail * total || len >= kMax) {
      double rest = total;
      for (std::size_t k = 0; k < len; ++k) {
        if (rest <= tail * total) return k;
        rest -= h[k] * h[k];
      }
      return len;
    }
    len *= 4;
  }
}

}  // namespace dpfilter
