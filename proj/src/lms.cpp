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

#include "dpfilter/lms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "dpfilter/error.hpp"
#include "dpfilter/sensitivity.hpp"

namespace dpfilter {

namespace {

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void require_same_grid(const SpectrumGrid& a, const SpectrumGrid& b, const char* what) {
  if (a.n() != b.n()) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": grid sizes differ");
  }
}

void require_inputs(const SpectrumGrid& f, const SpectrumGrid& pu) {
  require_same_grid(f, pu, "input spectrum");
  if (pu.rows() != f.cols() || pu.cols() != f.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "input spectrum must be m x m");
  }
}

// Inverse of a Hermitian positive definite matrix, or NotPositiveDefinite.
CMat hermitian_inverse(const CMat& a, const char* what) {
  Eigen::LLT<CMat> llt(a);
  const double scale = a.diagonal().real().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success || !(scale > 0.0)) {
    throw Error(ErrorCode::kNotPositiveDefinite, std::string(what) + " is not positive definite");
  }
  const Vec diag = CMat(llt.matrixL()).diagonal().real();
  if (diag.minCoeff() <= 1e-7 * std::sqrt(scale)) {
    throw Error(ErrorCode::kNotPositiveDefinite, std::string(what) + " is numerically singular");
  }
  return llt.solve(CMat::Identity(a.rows(), a.cols()));
}

struct Tilde {
  std::vector<CMat> f;  // kappa F K
  std::vector<CMat> p;  // kappa^-2 K^-1 P K^-1
};

Tilde make_tilde(const SpectrumGrid& f, const SpectrumGrid& pu, const PrivacySpec& privacy) {
  require_inputs(f, pu);
  privacy.validate(f.cols());
  const double kap = kappa(privacy);
  const Vec kinv = privacy.k.cwiseInverse();
  Tilde t;
  for (std::size_t q = 0; q < f.size(); ++q) {
    t.f.push_back(kap * f[q] * privacy.k.asDiagonal());
    t.p.push_back(kinv.asDiagonal() * pu[q] * kinv.asDiagonal() / (kap * kap));
  }
  return t;
}

// Hermitian square root of a positive semidefinite matrix.
CMat psd_sqrt(const CMat& a, const char* what) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(a);
  const Vec ev = eig.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -1e-10 * scale) {
    throw Error(ErrorCode::kNotPositiveDefinite, std::string(what) + " is indefinite");
  }
  const Vec root = ev.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
}

// Per-frequency subproblem min_{x >= 0} Tr[W (P~^-1 + diag x)^-1] + lambda sum x.
// The inverse is formed as S (I + S X S)^-1 S with S = P~^1/2, so P~ may be
// singular at isolated frequencies.
class FrequencySolver {
 public:
  FrequencySolver(CMat s, CMat w) : s_(std::move(s)), w_(std::move(w)) {}

  double value(const Vec& x, double lambda) const {
    const CMat mi = inverse(x);
    return (w_ * mi).trace().real() + lambda * x.sum();
  }

  // d_i = -[M^-1 W M^-1]_ii, the derivative of the trace term.
  Vec derivative(const Vec& x) const {
    const CMat mi = inverse(x);
    return -(mi * w_ * mi).diagonal().real();
  }

  void solve(Vec& x, double lambda, double tol, int max_iter) const {
    const Eigen::Index m = x.size();
    for (int it = 0; it < max_iter; ++it) {
      const CMat mi = inverse(x);
      const CMat z = mi * w_ * mi;
      Vec g = -z.diagonal().real();
      g.array() += lambda;
      double pg = 0.0;
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < m; ++i) {
        pg = std::max(pg, x[i] > 0.0 ? std::abs(g[i]) : std::max(0.0, -g[i]));
        if (x[i] > 0.0 || g[i] < 0.0) free.push_back(i);
      }
      if (pg <= tol * lambda || free.empty()) return;
      const auto nf = static_cast<Eigen::Index>(free.size());
      Mat h(nf, nf);
      Vec gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = g[free[a]];
        for (Eigen::Index c = 0; c < nf; ++c) {
          h(a, c) = 2.0 * (z(free[a], free[c]) * mi(free[c], free[a])).real();
        }
      }
      Vec df = -h.ldlt().solve(gf);
      if (!df.allFinite() || gf.dot(df) >= 0.0) df = -gf;
      Vec d = Vec::Zero(m);
      for (Eigen::Index a = 0; a < nf; ++a) d[free[a]] = df[a];

      const double f0 = (w_ * mi).trace().real() + lambda * x.sum();
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        const Vec xn = (x + t * d).cwiseMax(0.0);
        const double decrease = g.dot(xn - x);
        // The slack absorbs roundoff once the decrease is below machine precision.
        if (value(xn, lambda) <= f0 + 1e-4 * decrease + 1e-14 * std::abs(f0)) {
          moved = (xn - x).cwiseAbs().maxCoeff() > 0.0;
          x = xn;
          break;
        }
      }
      if (!moved) return;
    }
  }

 private:
  CMat inverse(const Vec& x) const {
    CMat inner = s_ * x.cast<cplx>().asDiagonal() * s_;
    inner.diagonal().array() += 1.0;
    return s_ * inner.llt().solve(s_);
  }

  CMat s_;
  CMat w_;
};

}  // namespace

SpectrumGrid wiener_smoother(const SpectrumGrid& f, const SpectrumGrid& pu,
                             const SpectrumGrid& g, double sigma) {
  require_inputs(f, pu);
  require_same_grid(f, g, "prefilter");
  if (g.cols() != f.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "prefilter columns must match F");
  }
  SpectrumGrid h(f.n(), f.rows(), g.rows());
  const CMat noise = sigma * sigma * CMat::Identity(g.rows(), g.rows());
  for (std::size_t q = 0; q < f.size(); ++q) {
    const CMat pv = g[q] * pu[q] * g[q].adjoint() + noise;
    const CMat pvi = hermitian_inverse(pv, "released-signal spectrum");
    h[q] = f[q] * pu[q] * g[q].adjoint() * pvi;
  }
  return h;
}

double linear_estimator_mse(const SpectrumGrid& f, const SpectrumGrid& pu,
                            const SpectrumGrid& g, double sigma,
                            const SpectrumGrid& h) {
  require_inputs(f, pu);
  require_same_grid(f, g, "prefilter");
  require_same_grid(f, h, "postfilter");
  const Vec w = trapezoid_weights(f.n());
  double total = 0.0;
  for (std::size_t q = 0; q < f.size(); ++q) {
    const CMat e = f[q] - h[q] * g[q];
    const double val = (e * pu[q] * e.adjoint()).trace().real() +
                       sigma * sigma * h[q].squaredNorm();
    total += w[static_cast<Eigen::Index>(q)] * val;
  }
  return total;
}

double lms_objective(const SpectrumGrid& f, const SpectrumGrid& pu,
                     const PrivacySpec& privacy, const Mat& x) {
  const Tilde t = make_tilde(f, pu, privacy);
  if (x.rows() != static_cast<Eigen::Index>(f.size()) || x.cols() != f.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "allocation profile shape");
  }
  const Vec w = trapezoid_weights(f.n());
  const Eigen::Index m = f.cols();
  double total = 0.0;
  for (std::size_t q = 0; q < f.size(); ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    // (P~^-1 + X)^-1 = (I + P~ X)^-1 P~, valid for singular P~ as well.
    CMat a = CMat::Identity(m, m) + t.p[q] * x.row(qi).transpose().cast<cplx>().asDiagonal();
    const CMat y = a.partialPivLu().solve(t.p[q]);
    total += w[qi] * (t.f[q] * y * t.f[q].adjoint()).trace().real();
  }
  return total;
}

double profile_mass(const Mat& x) {
  const Vec w = trapezoid_weights(static_cast<std::size_t>(x.rows() - 1));
  return w.dot(x.rowwise().sum());
}

AllocationProfile waterfill_diagonal(const SpectrumGrid& f, const SpectrumGrid& pu,
                                     const PrivacySpec& privacy) {
  const Tilde t = make_tilde(f, pu, privacy);
  const auto rows = static_cast<Eigen::Index>(f.size());
  const Eigen::Index m = f.cols();
  Mat a(rows, m);
  Mat inv_p(rows, m);
  for (Eigen::Index q = 0; q < rows; ++q) {
    const CMat& p = t.p[static_cast<std::size_t>(q)];
    const double scale = p.diagonal().real().cwiseAbs().maxCoeff();
    CMat off = p;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(ErrorCode::kNotDiagonal, "waterfilling needs a diagonal input spectrum");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const double pi = p(i, i).real();
      if (!(pi > 0.0)) {
        throw Error(ErrorCode::kNotPositiveDefinite, "input spectrum has a nonpositive diagonal");
      }
      inv_p(q, i) = 1.0 / pi;
      a(q, i) = t.f[static_cast<std::size_t>(q)].col(i).norm();
    }
  }
  if (a.maxCoeff() <= 0.0) {
    throw Error(ErrorCode::kDegenerateObjective, "F is identically zero");
  }
  // x = max(0, a mu - 1/p) with mu = lambda^-1/2; the mass is increasing in mu.
  auto profile = [&](double mu) { return (a * mu - inv_p).cwiseMax(0.0).eval(); };
  double lo = 0.0;
  double hi = 1.0;
  while (profile_mass(profile(hi)) < 1.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (profile_mass(profile(mid)) < 1.0 ? lo : hi) = mid;
  }
  AllocationProfile out;
  out.x = profile(hi);
  out.lambda = 1.0 / (hi * hi);
  out.objective = lms_objective(f, pu, privacy, out.x);
  return out;
}

AllocationProfile optimize_prefilter_general(const SpectrumGrid& f, const SpectrumGrid& pu,
                                             const PrivacySpec& privacy,
                                             const LmsOptions& options) {
  const Tilde t = make_tilde(f, pu, privacy);
  const std::size_t count = f.size();
  const Eigen::Index m = f.cols();
  std::vector<FrequencySolver> solvers;
  double wmax = 0.0;
  for (std::size_t q = 0; q < count; ++q) {
    const CMat w = t.f[q].adjoint() * t.f[q];
    wmax = std::max(wmax, w.cwiseAbs().maxCoeff());
    solvers.emplace_back(psd_sqrt(t.p[q], "input spectrum"), w);
  }
  if (wmax <= 0.0) {
    throw Error(ErrorCode::kDegenerateObjective, "F is identically zero");
  }
  const Vec weights = trapezoid_weights(f.n());
  Mat x = Mat::Zero(static_cast<Eigen::Index>(count), m);
  int evaluations = 0;
  auto mass_at = [&](double lambda) {
    ++evaluations;
    for (std::size_t q = 0; q < count; ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      Vec xq = x.row(qi).transpose();
      solvers[q].solve(xq, lambda, options.stationarity_tol, options.max_inner);
      x.row(qi) = xq.transpose();
    }
    return profile_mass(x);
  };

  // Bracket in log lambda; the mass decreases with lambda.
  double s_lo = 0.0;
  double c_lo = mass_at(1.0) - 1.0;
  double s_hi = 0.0;
  double c_hi = c_lo;
  while (c_lo < 0.0) {
    s_hi = s_lo;
    c_hi = c_lo;
    s_lo -= std::log(10.0);
    c_lo = mass_at(std::exp(s_lo)) - 1.0;
    if (s_lo < -200.0) throw Error(ErrorCode::kOptimizerStalled, "cannot bracket the multiplier");
  }
  while (c_hi > 0.0) {
    s_lo = s_hi;
    c_lo = c_hi;
    s_hi += std::log(10.0);
    c_hi = mass_at(std::exp(s_hi)) - 1.0;
    if (s_hi > 200.0) throw Error(ErrorCode::kOptimizerStalled, "cannot bracket the multiplier");
  }

  // Illinois iteration on c(s) = mass(e^s) - 1.
  double s = s_lo;
  double c = c_lo;
  int side = 0;
  bool converged = std::abs(c) <= options.constraint_tol;
  for (int it = 0; it < options.max_outer && !converged; ++it) {
    s = (s_lo * c_hi - s_hi * c_lo) / (c_hi - c_lo);
    if (!(s > s_lo && s < s_hi)) s = 0.5 * (s_lo + s_hi);
    c = mass_at(std::exp(s)) - 1.0;
    if (std::abs(c) <= options.constraint_tol || s_hi - s_lo < 1e-15) {
      // A collapsed bracket leaves inner-solver noise in the mass; the
      // profile is renormalized below and the duality gap certifies it.
      converged = std::abs(c) <= std::sqrt(options.constraint_tol);
      break;
    }
    if (c > 0.0) {
      s_lo = s;
      c_lo = c;
      if (side == 1) c_hi *= 0.5;
      side = 1;
    } else {
      s_hi = s;
      c_hi = c;
      if (side == -1) c_lo *= 0.5;
      side = -1;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kOptimizerStalled,
                "normalization residual " + format_sci(std::abs(c)) + " after " +
                    std::to_string(evaluations) + " sweeps");
  }
  x /= profile_mass(x);

  AllocationProfile out;
  out.x = x;
  out.lambda = std::exp(s);
  out.iterations = evaluations;
  out.objective = lms_objective(f, pu, privacy, x);
  double dot = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < count; ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    const Vec d = solvers[q].derivative(x.row(qi).transpose());
    dot += weights[qi] * d.dot(x.row(qi).transpose());
    best = std::min(best, d.minCoeff());
  }
  out.gap = (dot - best) / out.objective;
  return out;
}

AllocationProfile zfe_profile(const SpectrumGrid& f, const PrivacySpec& privacy) {
  privacy.validate(f.cols());
  Mat x(static_cast<Eigen::Index>(f.size()), f.cols());
  for (std::size_t q = 0; q < f.size(); ++q) {
    x.row(static_cast<Eigen::Index>(q)) =
        f[q].colwise().norm().cwiseProduct(privacy.k.transpose());
  }
  const double mass = profile_mass(x);
  if (!(mass > 0.0)) throw Error(ErrorCode::kDegenerateObjective, "F is identically zero");
  AllocationProfile out;
  out.x = x / mass;
  return out;
}

CausalWiener causal_wiener(const SpectrumGrid& f, const SpectrumGrid& pu,
                           const SpectrumGrid& g, double sigma,
                           const MatrixFactorOptions& options) {
  require_inputs(f, pu);
  require_same_grid(f, g, "prefilter");
  const std::size_t n = f.n();
  SpectrumGrid pv(n, g.rows(), g.rows());
  SpectrumGrid w(n, f.rows(), g.rows());
  const CMat noise = sigma * sigma * CMat::Identity(g.rows(), g.rows());
  for (std::size_t q = 0; q < f.size(); ++q) {
    pv[q] = g[q] * pu[q] * g[q].adjoint() + noise;
  }
  CausalWiener out;
  out.factor = matrix_canonical_factor(pv, options);
  // P_yv L^-* with L^-1 = A.
  for (std::size_t q = 0; q < f.size(); ++q) {
    w[q] = f[q] * pu[q] * g[q].adjoint() * out.factor.predictor_grid[q].adjoint();
  }
  const std::vector<Mat> lags = inverse_transform(w);
  double causal = 0.0;
  double anti = 0.0;
  for (std::size_t k = 0; k < lags.size(); ++k) (k < n ? causal : anti) += lags[k].squaredNorm();
  out.anticausal_leak = causal + anti > 0.0 ? anti / (causal + anti) : 0.0;

  const Mat pe_inv = out.factor.innovation.inverse();
  std::vector<Mat> right;
  for (const Mat& a : out.factor.predictor) right.push_back(pe_inv * a);
  MatrixFir h;
  h.start = 0;
  h.taps.assign(n + right.size() - 1, Mat::Zero(f.rows(), g.rows()));
  for (std::size_t j = 0; j < n; ++j) {
    if (lags[j].isZero(0.0)) continue;
    for (std::size_t i = 0; i < right.size(); ++i) h.taps[j + i] += lags[j] * right[i];
  }
  out.filter = trim_taps(h);
  out.mse = linear_estimator_mse(f, pu, g, sigma, freq_response(out.filter, n));
  return out;
}

MatrixFir trim_taps(const MatrixFir& fir, double rel) {
  double top = 0.0;
  for (const Mat& t : fir.taps) top = std::max(top, t.cwiseAbs().maxCoeff());
  MatrixFir out;
  if (fir.taps.empty()) return fir;
  if (top == 0.0) {
    out.start = 0;
    out.taps.push_back(Mat::Zero(fir.rows(), fir.cols()));
    return out;
  }
  std::size_t lo = 0;
  std::size_t hi = fir.taps.size();
  while (lo < hi && fir.taps[lo].cwiseAbs().maxCoeff() <= rel * top) ++lo;
  while (hi > lo && fir.taps[hi - 1].cwiseAbs().maxCoeff() <= rel * top) --hi;
  out.start = fir.start + static_cast<int>(lo);
  out.taps.assign(fir.taps.begin() + static_cast<long>(lo), fir.taps.begin() + static_cast<long>(hi));
  return out;
}

MechanismDesign assemble_lms(const TransferMatrix& f, const SpectrumGrid& pu, const Vec& mean,
                             const PrivacySpec& privacy, LmsMode mode,
                             const LmsOptions& options, AllocationProfile* profile_out) {
  privacy.validate(f.cols());
  const std::size_t n = options.grid_n;
  if (pu.n() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "input spectrum grid differs from grid_n");
  }
  const Eigen::Index m = f.cols();
  if (mean.size() != 0 && mean.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "input mean has the wrong length");
  }
  const SpectrumGrid fg = freq_response(f, n);

  bool diagonal = true;
  for (std::size_t q = 0; q < pu.size() && diagonal; ++q) {
    CMat off = pu[q];
    off.diagonal().setZero();
    diagonal = off.cwiseAbs().maxCoeff() <= 1e-14 * pu[q].cwiseAbs().maxCoeff();
  }
  const AllocationProfile profile = diagonal ? waterfill_diagonal(fg, pu, privacy)
                                             : optimize_prefilter_general(fg, pu, privacy, options);

  // |G_ii|^2 = x_i / k_i^2 with ||G K||_2 = 1; the scale cancels in sigma.
  FactorOptions fo;
  fo.floor_rel = options.floor_rel;
  fo.require_paley_wiener = false;
  fo.target_error = options.fit_tol;
  // Keeps the autocovariance of G P G* well inside the grid period.
  fo.max_order = std::min(options.max_order, static_cast<int>(n / 4));
  std::vector<RationalFilter> entries;
  double worst_fit = 0.0;
  int max_order = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vec s = profile.x.col(i) / (privacy.k[i] * privacy.k[i]);
    if (s.maxCoeff() <= 0.0) {
      entries.emplace_back(std::vector<double>{0.0});
      continue;
    }
    const ScalarFactor sf = scalar_spectral_factor(ScalarSpectrum{s}, options.order, fo);
    worst_fit = std::max(worst_fit, sf.filter_error);
    max_order = std::max(max_order, sf.order);
    entries.push_back(sf.filter);
  }
  const TransferMatrix g = TransferMatrix::diagonal(entries);
  const SpectrumGrid gg = freq_response(g, n);

  MechanismDesign d;
  d.target = f;
  d.prefilter = g;
  d.privacy = privacy;
  d.sensitivity = diagonal_sensitivity(g, privacy.k);
  d.noise_sigma = noise_sigma(d.sensitivity, privacy);
  d.input_mean = mean.size() == 0 ? Vec::Zero(m) : mean;
  d.diagnostics["objective_design"] = profile.objective;
  d.diagnostics["optimality_gap"] = profile.gap;
  d.diagnostics["prefilter_fit_error_max"] = worst_fit;
  d.diagnostics["prefilter_order_max"] = max_order;

  const SpectrumGrid smoother = wiener_smoother(fg, pu, gg, d.noise_sigma);
  const double smoother_mse = linear_estimator_mse(fg, pu, gg, d.noise_sigma, smoother);
  if (mode == LmsMode::kSmoother) {
    d.kind = MechanismKind::kWienerSmoother;
    d.theory_mse = smoother_mse;
    const int half = static_cast<int>(n);
    const MatrixFir taps = taps_from_grid(smoother, -(half - 1), half);
    double edge = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < taps.taps.size(); ++k) {
      const double e = taps.taps[k].squaredNorm();
      total += e;
      if (k < taps.taps.size() / 8 || k >= taps.taps.size() - taps.taps.size() / 8) edge += e;
    }
    d.diagnostics["smoother_tail_energy"] = total > 0.0 ? edge / total : 0.0;
    d.fir_postfilter = trim_taps(taps, 1e-12);
  } else {
    d.kind = MechanismKind::kWienerCausal;
    const CausalWiener cw = causal_wiener(fg, pu, gg, d.noise_sigma);
    d.fir_postfilter = cw.filter;
    d.diagnostics["causal_mse_analytic"] = cw.mse;
    d.diagnostics["anticausal_leak"] = cw.anticausal_leak;
    d.diagnostics["factor_residual"] = cw.factor.residual;
  }
  d.diagnostics["smoother_mse"] = smoother_mse;
  if (profile_out) *profile_out = profile;
  return d;
}

}  // namespace dpfilter
