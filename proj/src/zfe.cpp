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

#include "dpfilter/zfe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "dpfilter/error.hpp"
#include "dpfilter/sensitivity.hpp"

namespace dpfilter {

namespace {

// |F_i(e^{j w_q})|_2 for every column i, as an (N+1) x m matrix.
Mat column_norms(const TransferMatrix& f, std::size_t n) {
  const SpectrumGrid grid = freq_response(f, n);
  Mat out(static_cast<Eigen::Index>(n + 1), f.cols());
  for (std::size_t q = 0; q <= n; ++q) {
    out.row(static_cast<Eigen::Index>(q)) = grid[q].colwise().norm();
  }
  return out;
}

void require_k(const Vec& k, Eigen::Index m) {
  if (k.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch,
                "k has " + std::to_string(k.size()) + " entries, expected " +
                    std::to_string(m));
  }
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    if (!(k[i] > 0.0) || !std::isfinite(k[i])) {
      throw Error(ErrorCode::kInvalidPrivacySpec, "k entries must be positive");
    }
  }
}

ScalarFactor factor_column(const Vec& target, const ZfeOptions& options,
                           Eigen::Index column) {
  FactorOptions fo;
  fo.target_error = options.fit_tol;
  fo.max_order = options.max_order;
  try {
    return scalar_spectral_factor(ScalarSpectrum{target}, options.order, fo);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotFactorizable) throw;
    throw Error(ErrorCode::kNotFactorizable,
                "column " + std::to_string(column) + ": " + e.what());
  }
}

// FIR entries are checked through the winding number of a dense FFT, which
// avoids rooting high-order polynomials.
bool entry_invertible(const RationalFilter& g) {
  if (!g.is_stable()) return false;
  if (!g.is_fir()) return g.is_minimum_phase();
  const auto& h = g.numerator();
  if (h.size() == 1) return h[0] != 0.0;
  std::size_t len = 1;
  while (len < 16 * h.size()) len <<= 1;
  CVec x = CVec::Zero(static_cast<Eigen::Index>(len));
  for (std::size_t i = 0; i < h.size(); ++i) x[static_cast<Eigen::Index>(i)] = h[i];
  const CVec values = fft(x);
  const Eigen::VectorXd mags = values.cwiseAbs();
  if (mags.minCoeff() <= 1e-12 * mags.maxCoeff()) return false;
  return winding_number(values) == 0;
}

}  // namespace

RationalFilter design_simo_prefilter(const TransferMatrix& f, double k1,
                                     const ZfeOptions& options,
                                     ScalarFactor* details) {
  if (f.cols() != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "SIMO prefilter needs a single-input F");
  }
  std::vector<ScalarFactor> factors;
  const TransferMatrix g = design_diag_prefilter(f, Vec::Constant(1, k1), options,
                                                 details ? &factors : nullptr);
  if (details) *details = factors.front();
  return g(0, 0);
}

TransferMatrix design_diag_prefilter(const TransferMatrix& f, const Vec& k,
                                     const ZfeOptions& options,
                                     std::vector<ScalarFactor>* details) {
  require_k(k, f.cols());
  const Mat norms = column_norms(f, options.grid_n);
  std::vector<RationalFilter> entries;
  if (details) details->clear();
  for (Eigen::Index i = 0; i < f.cols(); ++i) {
    ScalarFactor sf = factor_column(norms.col(i) / k[i], options, i);
    entries.push_back(sf.filter);
    if (details) details->push_back(std::move(sf));
  }
  return TransferMatrix::diagonal(entries);
}

double zfe_mse_diag_bound(const TransferMatrix& f, const PrivacySpec& privacy,
                          std::size_t n) {
  privacy.validate(f.cols());
  const Mat norms = column_norms(f, n);
  const Vec w = trapezoid_weights(n);
  const double integral = w.dot(norms * privacy.k);
  const double kap = kappa(privacy);
  return kap * kap * integral * integral;
}

double zfe_general_lower_bound(const TransferMatrix& f,
                               const PrivacySpec& privacy, std::size_t n) {
  privacy.validate(f.cols());
  const SpectrumGrid grid = freq_response(f, n);
  const Vec w = trapezoid_weights(n);
  double integral = 0.0;
  for (std::size_t q = 0; q <= n; ++q) {
    const CMat fk = grid[q] * privacy.k.asDiagonal();
    Eigen::JacobiSVD<CMat> svd(fk);
    integral += w[static_cast<Eigen::Index>(q)] * svd.singularValues().sum();
  }
  const double kap = kappa(privacy);
  return kap * kap * integral * integral;
}

MechanismDesign assemble_zfe(const TransferMatrix& f, const TransferMatrix& g,
                             const PrivacySpec& privacy, std::size_t n) {
  privacy.validate(f.cols());
  if (g.rows() != f.cols() || g.cols() != f.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "prefilter must be m x m");
  }
  if (!g.is_diagonal()) {
    throw Error(ErrorCode::kNotDiagonal, "zero forcing needs a diagonal prefilter");
  }
  const Eigen::Index m = f.cols();
  TransferMatrix h(f.rows(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!entry_invertible(g(i, i))) {
      throw Error(ErrorCode::kUnstableInverse,
                  "prefilter entry " + std::to_string(i) + " is not minimum phase");
    }
    const RationalFilter inv = g(i, i).inverse();
    for (Eigen::Index r = 0; r < f.rows(); ++r) h(r, i) = f(r, i) * inv;
  }

  // ||F G^-1||_2 on the grid: G^-1 may have a very long impulse response.
  const SpectrumGrid fg = freq_response(f, n);
  const SpectrumGrid gg = freq_response(g, n);
  const Vec w = trapezoid_weights(n);
  double energy = 0.0;
  double hg_residual = 0.0;
  for (std::size_t q = 0; q <= n; ++q) {
    CMat hq = fg[q];
    for (Eigen::Index i = 0; i < m; ++i) hq.col(i) /= gg[q](i, i);
    energy += w[static_cast<Eigen::Index>(q)] * hq.squaredNorm();
    hg_residual = std::max(hg_residual, (hq * gg[q] - fg[q]).cwiseAbs().maxCoeff());
  }

  MechanismDesign d;
  d.kind = MechanismKind::kZeroForcing;
  d.target = f;
  d.prefilter = g;
  d.privacy = privacy;
  d.sensitivity = diagonal_sensitivity(g, privacy.k);
  d.noise_sigma = noise_sigma(d.sensitivity, privacy);
  d.theory_mse = d.noise_sigma * d.noise_sigma * energy;
  d.input_mean = Vec::Zero(m);
  d.rational_postfilter = h;
  d.diagnostics["hg_residual"] = hg_residual;
  return d;
}

MechanismDesign design_zfe(const TransferMatrix& f, const PrivacySpec& privacy,
                           const ZfeOptions& options) {
  privacy.validate(f.cols());
  std::vector<ScalarFactor> factors;
  const TransferMatrix g = design_diag_prefilter(f, privacy.k, options, &factors);
  MechanismDesign d = assemble_zfe(f, g, privacy, options.grid_n);
  const double diag = zfe_mse_diag_bound(f, privacy, options.grid_n);
  const double general = zfe_general_lower_bound(f, privacy, options.grid_n);
  double worst_fit = 0.0;
  int max_order = 0;
  for (const ScalarFactor& sf : factors) {
    worst_fit = std::max(worst_fit, sf.filter_error);
    max_order = std::max(max_order, sf.order);
  }
  d.diagnostics["diag_bound"] = diag;
  d.diagnostics["nuclear_lower_bound"] = general;
  d.diagnostics["bound_ratio"] = *d.theory_mse / diag;
  d.diagnostics["nuclear_gap"] = *d.theory_mse / general;
  d.diagnostics["fit_error_max"] = worst_fit;
  d.diagnostics["prefilter_order_max"] = max_order;
  return d;
}

MechanismDesign output_perturbation(const TransferMatrix& f,
                                    const PrivacySpec& privacy, bool exact) {
  privacy.validate(f.cols());
  MechanismDesign d;
  d.kind = MechanismKind::kOutputPerturbation;
  d.target = f;
  d.prefilter = f;
  d.privacy = privacy;
  if (f.cols() == 1) {
    d.sensitivity = simo_sensitivity(f, privacy.k[0]);
  } else if (f.rows() == f.cols() && f.is_diagonal()) {
    d.sensitivity = diagonal_sensitivity(f, privacy.k);
  } else {
    const SensitivityReport report =
        exact ? mimo_exact(realize_state_space(f), privacy.k) : mimo_bounds(f, privacy.k);
    d.sensitivity = report.exact.value_or(report.upper);
    d.diagnostics["sensitivity_lower"] = report.lower;
    d.diagnostics["sensitivity_upper"] = report.upper;
  }
  d.noise_sigma = noise_sigma(d.sensitivity, privacy);
  d.theory_mse = d.noise_sigma * d.noise_sigma * static_cast<double>(f.rows());
  d.input_mean = Vec::Zero(f.cols());
  d.rational_postfilter = TransferMatrix::identity(f.rows());
  return d;
}

}  // namespace dpfilter
