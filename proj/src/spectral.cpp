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

#include "dpfilter/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "dpfilter/error.hpp"

namespace dpfilter {

namespace {

void require_spectrum(const ScalarSpectrum& s) {
  if (s.values.size() < 9) {
    throw Error(ErrorCode::kDimensionMismatch, "spectrum needs at least 9 samples");
  }
}

// Even extension of a half-grid real function to the full 2N circle.
CVec circle_values(const Vec& half) {
  const auto n = half.size() - 1;
  CVec out(2 * n);
  for (Eigen::Index q = 0; q <= n; ++q) out[q] = half[q];
  for (Eigen::Index q = n + 1; q < 2 * n; ++q) out[q] = half[2 * n - q];
  return out;
}

// Zeros of an FIR taken outside the unit circle are reflected inside
// (gain scaled by |r|), which leaves |g| unchanged.
std::vector<double> make_minimum_phase(const std::vector<double>& h) {
  const std::vector<cplx> zeros = poly::roots(h);
  bool changed = false;
  double gain = h[0];
  std::vector<cplx> fixed;
  for (cplx r : zeros) {
    const double mod = std::abs(r);
    if (mod > 1.0) {
      gain *= mod;
      r = 1.0 / std::conj(r);
      changed = true;
    }
    if (std::abs(r) >= 1.0 - 1e-8) {
      r *= (1.0 - 1e-8) / std::abs(r);
      changed = true;
    }
    fixed.push_back(r);
  }
  if (!changed) return h;
  std::vector<double> out = poly::from_roots(fixed, std::abs(gain));
  out.resize(h.size(), 0.0);
  return out;
}

bool fir_is_minimum_phase_on_grid(const std::vector<double>& h, std::size_t n) {
  std::size_t size = std::max<std::size_t>(2 * n, 16 * h.size());
  std::size_t pow2 = 1;
  while (pow2 < size) pow2 <<= 1;
  CVec x = CVec::Zero(static_cast<Eigen::Index>(pow2));
  for (std::size_t k = 0; k < h.size(); ++k) x[k] = h[k];
  const CVec values = fft(x);
  const double floor = 1e-9 * values.cwiseAbs().maxCoeff();
  if (values.cwiseAbs().minCoeff() <= floor) return false;
  return winding_number(values) == 0;
}

// Scaling h_k by r^k pulls every zero radially inward by r. Cheap
// alternative to rooting when the order is high.
std::vector<double> damp_to_minimum_phase(const std::vector<double>& h,
                                          std::size_t n) {
  for (double gap = 1e-6; gap < 0.2; gap *= 2.0) {
    const double r = 1.0 - gap;
    std::vector<double> out(h);
    double scale = 1.0;
    for (double& v : out) {
      v *= scale;
      scale *= r;
    }
    if (fir_is_minimum_phase_on_grid(out, n)) return out;
  }
  return {};
}

double relative_error(const CVec& response_half, const Vec& target) {
  const double scale = target.maxCoeff();
  double err = 0.0;
  for (Eigen::Index q = 0; q < target.size(); ++q) {
    err = std::max(err, std::abs(std::norm(response_half[q]) - target[q]));
  }
  return err / scale;
}

}  // namespace

int winding_number(const CVec& values) {
  double total = 0.0;
  const Eigen::Index len = values.size();
  for (Eigen::Index q = 0; q < len; ++q) {
    const cplx a = values[q];
    const cplx b = values[(q + 1) % len];
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

bool paley_wiener_check(const ScalarSpectrum& s, double floor_rel) {
  if (s.values.size() < 2) return false;
  const Vec& v = s.values;
  for (Eigen::Index q = 0; q < v.size(); ++q) {
    if (!std::isfinite(v[q]) || v[q] < 0.0) return false;
  }
  const double top = v.maxCoeff();
  if (!(top > 0.0)) return false;
  const double floor = floor_rel * top;
  const Vec w = trapezoid_weights(s.n());
  double below = 0.0;
  double log_mean = 0.0;
  for (Eigen::Index q = 0; q < v.size(); ++q) {
    if (v[q] < floor) below += w[q];
    log_mean += w[q] * std::log(std::max(v[q], floor));
  }
  return below < 0.01 && std::isfinite(log_mean);
}

ScalarFactor scalar_spectral_factor(const ScalarSpectrum& s, int order,
                                    const FactorOptions& options) {
  require_spectrum(s);
  if (order < 0) {
    throw Error(ErrorCode::kDimensionMismatch, "factor order must be nonnegative");
  }
  const Vec& v = s.values;
  for (Eigen::Index q = 0; q < v.size(); ++q) {
    if (!std::isfinite(v[q]) || v[q] < 0.0) {
      throw Error(ErrorCode::kNotFactorizable, "spectrum has negative or non-finite samples");
    }
  }
  const double top = v.maxCoeff();
  if (!(top > 0.0)) {
    throw Error(ErrorCode::kNotFactorizable, "spectrum is identically zero");
  }
  if (options.require_paley_wiener && !paley_wiener_check(s, options.floor_rel)) {
    throw Error(ErrorCode::kNotFactorizable,
                "log-integrability (Paley-Wiener) fails");
  }
  const std::size_t n = s.n();
  const auto len = static_cast<Eigen::Index>(2 * n);
  const double floor = options.floor_rel * top;
  Vec floored = v.cwiseMax(floor);

  CVec logs = circle_values(floored.array().log().matrix());
  const CVec cep = ifft(logs);
  CVec folded = CVec::Zero(len);
  folded[0] = 0.5 * cep[0].real();
  for (Eigen::Index k = 1; k < static_cast<Eigen::Index>(n); ++k) {
    folded[k] = cep[k].real();
  }
  folded[static_cast<Eigen::Index>(n)] = 0.5 * cep[static_cast<Eigen::Index>(n)].real();
  const CVec log_factor = fft(folded);
  CVec grid(len);
  for (Eigen::Index q = 0; q < len; ++q) grid[q] = std::exp(log_factor[q]);
  const CVec impulse = ifft(grid);

  ScalarFactor out;
  out.grid_response = grid.head(static_cast<Eigen::Index>(n + 1));
  out.grid_error = relative_error(out.grid_response, v);

  const int cap = std::min<int>(std::max(order, options.max_order),
                                static_cast<int>(len) - 1);
  int current = std::min(order, static_cast<int>(len) - 1);
  bool have = false;
  while (true) {
    std::vector<double> h(static_cast<std::size_t>(current) + 1);
    for (int k = 0; k <= current; ++k) h[static_cast<std::size_t>(k)] = impulse[k].real();
    if (current > 0 && !fir_is_minimum_phase_on_grid(h, n)) {
      h = h.size() > 129 ? damp_to_minimum_phase(h, n) : make_minimum_phase(h);
    }
    if (h.empty()) {
      if (current >= cap) break;
      current = std::min(cap, 2 * current + 1);
      continue;
    }
    RationalFilter candidate(h);
    const SpectrumGrid response = freq_response(candidate, n);
    CVec half(static_cast<Eigen::Index>(n + 1));
    for (std::size_t q = 0; q <= n; ++q) half[static_cast<Eigen::Index>(q)] = response[q](0, 0);
    const double err = relative_error(half, v);
    if (!have || err < out.filter_error) {
      out.filter = candidate;
      out.filter_error = err;
      out.order = current;
      have = true;
    }
    if (options.target_error <= 0.0 || out.filter_error <= options.target_error ||
        current >= cap) {
      break;
    }
    current = std::min(cap, 2 * current + 1);
  }
  if (!have) {
    std::vector<double> h(129);
    for (int k = 0; k <= 128; ++k) h[static_cast<std::size_t>(k)] = impulse[k].real();
    out.filter = RationalFilter(make_minimum_phase(h));
    out.order = 128;
    const SpectrumGrid response = freq_response(out.filter, n);
    CVec half(static_cast<Eigen::Index>(n + 1));
    for (std::size_t q = 0; q <= n; ++q) half[static_cast<Eigen::Index>(q)] = response[q](0, 0);
    out.filter_error = relative_error(half, v);
  }
  return out;
}

RationalFit fit_rational_magnitude(const ScalarSpectrum& s, int order) {
  require_spectrum(s);
  if (order < 0 || order >= static_cast<int>(s.n())) {
    throw Error(ErrorCode::kFitFailed, "fit order must lie in [0, N)");
  }
  const Vec& v = s.values;
  if (v.minCoeff() <= 0.0 || !v.allFinite()) {
    throw Error(ErrorCode::kFitFailed, "fit target must be strictly positive");
  }
  const CVec r = ifft(circle_values(v));
  // Levinson-Durbin recursion on the autocorrelation r_0..r_order.
  std::vector<double> a{1.0};
  double err = r[0].real();
  const double r0 = err;
  for (int p = 1; p <= order; ++p) {
    double acc = r[p].real();
    for (int k = 1; k < p; ++k) acc += a[static_cast<std::size_t>(k)] * r[p - k].real();
    const double refl = -acc / err;
    if (!(std::abs(refl) < 1.0 - 1e-12)) {
      std::ostringstream msg;
      msg << "reflection coefficient " << refl << " at order " << p
          << " (Toeplitz condition estimate " << r0 / err << ")";
      throw Error(ErrorCode::kFitFailed, msg.str());
    }
    std::vector<double> next(static_cast<std::size_t>(p) + 1, 0.0);
    next[0] = 1.0;
    for (int k = 1; k < p; ++k) {
      next[static_cast<std::size_t>(k)] =
          a[static_cast<std::size_t>(k)] + refl * a[static_cast<std::size_t>(p - k)];
    }
    next[static_cast<std::size_t>(p)] = refl;
    a.swap(next);
    err *= (1.0 - refl * refl);
  }
  const Vec w = trapezoid_weights(s.n());
  const double geo = std::exp(w.dot(v.array().log().matrix()));
  RationalFit fit;
  fit.filter = RationalFilter({std::sqrt(err)}, a);
  fit.residual = err / geo - 1.0;
  fit.condition = r0 / err;
  return fit;
}

MatrixFactorization matrix_canonical_factor(const SpectrumGrid& p,
                                            const MatrixFactorOptions& options) {
  const Eigen::Index m = p.rows();
  if (m != p.cols() || m == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "spectrum must be square");
  }
  const std::size_t n = p.n();
  for (std::size_t q = 0; q <= n; ++q) {
    const CMat& s = p[q];
    const double scale = std::max(s.norm(), 1e-300);
    if (!s.allFinite() || (s - s.adjoint()).norm() > 1e-9 * scale) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "sample " + std::to_string(q) + " is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (s + s.adjoint()), Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 1e-13 * std::max(hi, 0.0)) || !(hi > 0.0)) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "sample " + std::to_string(q) + " is not positive definite");
    }
  }
  std::vector<Mat> r = inverse_transform(p);
  // Bandwidth: drop the autocovariance tail below tail_rel.
  const double r0 = r[0].norm();
  int band = static_cast<int>(n);
  while (band > 0 && r[static_cast<std::size_t>(band)].norm() <= options.tail_rel * r0) {
    --band;
  }
  auto cov = [&](int k) -> Mat {
    // R[k] = E[x_t x_{t-k}^T]; R[-k] = R[k]^T.
    if (std::abs(k) > band) return Mat::Zero(m, m);
    if (k >= 0) return r[static_cast<std::size_t>(k)];
    return r[static_cast<std::size_t>(-k)].transpose();
  };

  // Whittle's multichannel Levinson recursion.
  std::vector<Mat> fwd{Mat::Identity(m, m)};
  std::vector<Mat> bwd{Mat::Identity(m, m)};
  Mat pf = cov(0);
  Mat pb = cov(0);
  const int max_order = std::min<int>(options.max_order, static_cast<int>(n) - 1);
  int quiet = 0;
  int order = 0;
  bool converged = false;
  for (; order < max_order;) {
    Mat delta = Mat::Zero(m, m);
    for (int k = 0; k <= order; ++k) delta += fwd[static_cast<std::size_t>(k)] * cov(order + 1 - k);
    const Mat kf = pb.ldlt().solve(delta.transpose()).transpose();
    const Mat kb = pf.ldlt().solve(delta).transpose();
    std::vector<Mat> fwd_next(static_cast<std::size_t>(order) + 2, Mat::Zero(m, m));
    std::vector<Mat> bwd_next(static_cast<std::size_t>(order) + 2, Mat::Zero(m, m));
    for (int k = 0; k <= order; ++k) {
      fwd_next[static_cast<std::size_t>(k)] += fwd[static_cast<std::size_t>(k)];
      fwd_next[static_cast<std::size_t>(k) + 1] -= kf * bwd[static_cast<std::size_t>(k)];
      bwd_next[static_cast<std::size_t>(k) + 1] += bwd[static_cast<std::size_t>(k)];
      bwd_next[static_cast<std::size_t>(k)] -= kb * fwd[static_cast<std::size_t>(k)];
    }
    pf = pf - kf * delta.transpose();
    pb = pb - kb * delta;
    pf = 0.5 * (pf + pf.transpose());
    pb = 0.5 * (pb + pb.transpose());
    fwd.swap(fwd_next);
    bwd.swap(bwd_next);
    ++order;
    if (!pf.allFinite() || !pb.allFinite()) break;
    const double partial = delta.norm() / std::sqrt(pf.norm() * pb.norm());
    quiet = partial <= options.reflection_tol ? quiet + 1 : 0;
    if (quiet >= 3) {
      converged = true;
      break;
    }
  }
  if (max_order <= 0) converged = true;
  if (!pf.allFinite() || !pb.allFinite()) {
    throw Error(ErrorCode::kFactorizationStalled, "Levinson recursion lost positivity");
  }
  while (fwd.size() > 1 && fwd.back().norm() <= 1e-15) fwd.pop_back();

  MatrixFactorization out;
  out.predictor = fwd;
  out.innovation = pf;
  out.order = static_cast<int>(fwd.size()) - 1;
  out.bandwidth = band;
  MatrixFir pred{0, fwd};
  out.predictor_grid = freq_response(pred, n);
  out.factor_grid = SpectrumGrid(n, m, m);
  for (std::size_t q = 0; q <= n; ++q) {
    out.factor_grid[q] = out.predictor_grid[q].inverse();
  }
  // Causal taps of L.
  const std::vector<Mat> circ = inverse_transform(out.factor_grid);
  double total = 0.0;
  for (const Mat& t : circ) total += t.squaredNorm();
  std::size_t keep = n;
  double tail = 0.0;
  while (keep > 1) {
    const double e = circ[keep - 1].squaredNorm();
    if (tail + e > 1e-28 * total) break;
    tail += e;
    --keep;
  }
  out.factor.start = 0;
  out.factor.taps.assign(circ.begin(), circ.begin() + static_cast<long>(keep));

  double residual = 0.0;
  for (std::size_t q = 0; q <= n; ++q) {
    const CMat& l = out.factor_grid[q];
    const CMat rec = l * pf.cast<cplx>() * l.adjoint();
    residual = std::max(residual, (rec - p[q]).norm() / p[q].norm());
  }
  out.residual = residual;
  // Minimum phase: det A must not wind around the origin.
  CVec det(static_cast<Eigen::Index>(2 * n));
  for (std::size_t q = 0; q < 2 * n; ++q) {
    det[static_cast<Eigen::Index>(q)] = out.predictor_grid.circle(q).determinant();
  }
  if (winding_number(det) != 0) {
    throw Error(ErrorCode::kFactorizationStalled, "predictor is not minimum phase");
  }
  // An unconverged predictor at the order cap is still accepted when it
  // reproduces the spectrum.
  if (!(residual <= options.residual_tol)) {
    std::ostringstream msg;
    if (!converged) msg << "predictor did not converge within order " << max_order << "; ";
    msg << "reconstruction residual " << residual << " exceeds " << options.residual_tol;
    throw Error(ErrorCode::kFactorizationStalled, msg.str());
  }
  return out;
}

}  // namespace dpfilter
