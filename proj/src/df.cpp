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

#include "dpfilter/df.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "dpfilter/error.hpp"

namespace dpfilter {

namespace {

void require_monic(const MatrixFir& f, const char* what) {
  if (f.taps.empty() || f.start != 0) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " must be causal");
  }
  const Mat& lead = f.taps.front();
  if (lead.rows() != lead.cols() ||
      (lead - Mat::Identity(lead.rows(), lead.cols())).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " must be monic");
  }
}

std::vector<Mat> convolve_taps(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  std::vector<Mat> out(a.size() + b.size() - 1, Mat::Zero(a.front().rows(), b.front().cols()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

}  // namespace

SpectrumGrid df_error_spectrum(const SpectrumGrid& pu, const SpectrumGrid& g, double sigma) {
  if (pu.n() != g.n() || g.cols() != pu.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "prefilter and input spectrum disagree");
  }
  SpectrumGrid e(pu.n(), pu.rows(), pu.cols());
  const CMat noise = sigma * sigma * CMat::Identity(g.rows(), g.rows());
  for (std::size_t q = 0; q < pu.size(); ++q) {
    const CMat gp = g[q] * pu[q];
    const CMat pv = gp * g[q].adjoint() + noise;
    const CMat gain = pv.ldlt().solve(gp);
    const CMat val = pu[q] - gp.adjoint() * gain;
    e[q] = 0.5 * (val + val.adjoint());
  }
  return e;
}

DfFactors df_factorizations(const SpectrumGrid& f, const SpectrumGrid& pu,
                            const SpectrumGrid& g, double sigma,
                            const PrivacySpec& privacy,
                            const MatrixFactorOptions& options) {
  privacy.validate(f.cols());
  if (f.n() != pu.n()) throw Error(ErrorCode::kDimensionMismatch, "grid sizes differ");
  const double kap = kappa(privacy);
  DfFactors out;

  const MatrixFactorization fq = matrix_canonical_factor(df_error_spectrum(pu, g, sigma), options);
  out.q = fq.factor;
  out.q_grid = fq.factor_grid;
  out.r = fq.innovation / (kap * kap);
  out.q_residual = fq.residual;

  // S* T S = F* F: factor the transpose canonically, then S_k = L_k^T.
  SpectrumGrid gram(f.n(), f.cols(), f.cols());
  for (std::size_t q = 0; q < f.size(); ++q) {
    gram[q] = (f[q].adjoint() * f[q]).transpose();
  }
  const MatrixFactorization fs = matrix_canonical_factor(gram, options);
  out.s = fs.factor;
  for (Mat& tap : out.s.taps) tap.transposeInPlace();
  out.s_grid = SpectrumGrid(f.n(), f.cols(), f.cols());
  for (std::size_t q = 0; q < f.size(); ++q) out.s_grid[q] = fs.factor_grid[q].transpose();
  out.t = fs.innovation;
  out.s_residual = fs.residual;
  return out;
}

MatrixFir optimal_feedback(const MatrixFir& q, const MatrixFir& s, double tol, int max_length) {
  require_monic(q, "Q");
  require_monic(s, "S");
  if (q.rows() != s.rows()) throw Error(ErrorCode::kDimensionMismatch, "Q and S sizes differ");
  const std::vector<Mat> c = convolve_taps(q.taps, s.taps);
  const Eigen::Index m = q.rows();
  const std::size_t window = std::max<std::size_t>(c.size(), 8);
  std::vector<Mat> x{Mat::Identity(m, m)};
  double top = 1.0;
  std::size_t quiet = 0;
  while (true) {
    const std::size_t k = x.size();
    Mat next = Mat::Zero(m, m);
    for (std::size_t j = 1; j < c.size() && j <= k; ++j) next -= c[j] * x[k - j];
    const double size = next.cwiseAbs().maxCoeff();
    if (!std::isfinite(size) || size > 1e8 * top) {
      throw Error(ErrorCode::kUnstableInverse, "feedback series diverges");
    }
    top = std::max(top, size);
    x.push_back(std::move(next));
    quiet = size <= tol * top ? quiet + 1 : 0;
    if (quiet >= window) break;
    if (static_cast<int>(x.size()) >= max_length) {
      throw Error(ErrorCode::kUnstableInverse,
                  "feedback series has not decayed after " + std::to_string(max_length) + " taps");
    }
  }
  while (x.size() > 1 && x.back().cwiseAbs().maxCoeff() <= tol * top) x.pop_back();
  return MatrixFir{0, x};
}

double df_theory_mse(const Mat& t, const Mat& r, const PrivacySpec& privacy) {
  const double kap = kappa(privacy);
  return kap * kap * (t * r).trace();
}

double monic_lemma_value(const Mat& t, const MatrixFir& w, const Mat& r) {
  double total = 0.0;
  for (const Mat& tap : w.taps) total += (t * tap * r * tap.transpose()).trace();
  return total;
}

Vec decision_device(const Vec& x, DecisionDomain domain) {
  switch (domain) {
    case DecisionDomain::kReals:
      return x;
    case DecisionDomain::kNonnegativeIntegers:
      return x.array().round().max(0.0).matrix();
    case DecisionDomain::kBinary:
      return x.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
  }
  return x;
}

MechanismDesign assemble_df(const TransferMatrix& f, const SpectrumGrid& pu, const Vec& mean,
                            const PrivacySpec& privacy, DecisionDomain domain, int lookahead,
                            const LmsOptions& options) {
  if (lookahead < 0) throw Error(ErrorCode::kConfigError, "lookahead must be nonnegative");
  const std::size_t n = options.grid_n;
  if (lookahead >= static_cast<int>(n)) {
    throw Error(ErrorCode::kConfigError, "lookahead exceeds the grid size");
  }
  MechanismDesign d = assemble_lms(f, pu, mean, privacy, LmsMode::kSmoother, options);
  const double lms_mse = *d.theory_mse;
  const SpectrumGrid fg = freq_response(f, n);
  const SpectrumGrid gg = freq_response(d.prefilter, n);
  const DfFactors fac = df_factorizations(fg, pu, gg, d.noise_sigma, privacy);
  const MatrixFir b = optimal_feedback(fac.q, fac.s);
  const Eigen::Index m = f.cols();

  // H1 = B P G* P_v^-1 with B evaluated exactly on the grid.
  SpectrumGrid h1(n, m, gg.rows());
  const CMat noise = d.noise_sigma * d.noise_sigma * CMat::Identity(gg.rows(), gg.rows());
  for (std::size_t q = 0; q <= n; ++q) {
    const CMat bq = (fac.q_grid[q] * fac.s_grid[q]).inverse();
    const CMat pv = gg[q] * pu[q] * gg[q].adjoint() + noise;
    const CMat wq = pv.ldlt().solve(gg[q] * pu[q]).adjoint();
    h1[q] = bq * wq;
  }
  const std::vector<Mat> all = inverse_transform(h1);
  double total = 0.0;
  for (const Mat& tap : all) total += tap.squaredNorm();
  MatrixFir forward = taps_from_grid(h1, -lookahead, static_cast<int>(n) - 1);
  double kept = 0.0;
  for (const Mat& tap : forward.taps) kept += tap.squaredNorm();

  MatrixFir feedback;
  feedback.start = 1;
  for (std::size_t k = 1; k < b.taps.size(); ++k) feedback.taps.push_back(b.taps[k]);
  if (feedback.taps.empty()) feedback.taps.push_back(Mat::Zero(m, m));

  // Two-way check of the formula: mean of Tr[F B E B* F*] with the series B.
  const SpectrumGrid bg = freq_response(b, n);
  const SpectrumGrid e = df_error_spectrum(pu, gg, d.noise_sigma);
  const Vec w = trapezoid_weights(n);
  double direct = 0.0;
  for (std::size_t q = 0; q <= n; ++q) {
    const CMat fb = fg[q] * bg[q];
    direct += w[static_cast<Eigen::Index>(q)] * (fb * e[q] * fb.adjoint()).trace().real();
  }

  d.kind = MechanismKind::kDecisionFeedback;
  d.domain = domain;
  d.lookahead = lookahead;
  d.theory_mse = df_theory_mse(fac.t, fac.r, privacy);
  d.fir_postfilter = trim_taps(forward, 1e-13);
  d.feedback = feedback;
  d.diagnostics["lms_smoother_mse"] = lms_mse;
  d.diagnostics["df_direct_mse"] = direct;
  d.diagnostics["forward_discarded_energy"] = total > 0.0 ? 1.0 - kept / total : 0.0;
  d.diagnostics["q_residual"] = fac.q_residual;
  d.diagnostics["s_residual"] = fac.s_residual;
  d.diagnostics["feedback_taps"] = static_cast<double>(feedback.taps.size());
  return d;
}

DfRun run_df_mechanism(const MechanismDesign& design, const EventStream& input,
                       std::uint64_t seed) {
  if (design.kind != MechanismKind::kDecisionFeedback || !design.fir_postfilter ||
      !design.feedback) {
    throw Error(ErrorCode::kConfigError, "not a decision-feedback design");
  }
  const Eigen::Index m = design.inputs();
  if (input.channels() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "input stream has the wrong channel count");
  }
  const Vec mu = design.input_mean.size() == m ? design.input_mean : Vec::Zero(m);
  const Eigen::Index steps = input.steps();
  Mat centered = input.samples.rowwise() - mu.transpose();
  const EventStream shaped = simulate(design.prefilter, EventStream(centered));
  const EventStream v = add_noise(shaped, design.noise_sigma, seed);
  const Mat ff = simulate(*design.fir_postfilter, v).samples;

  const MatrixFir& fb = *design.feedback;
  Mat hard_c = Mat::Zero(steps, m);
  Mat soft = Mat::Zero(steps, m);
  DfRun run;
  run.decisions = Mat::Zero(steps, m);
  for (Eigen::Index t = 0; t < steps; ++t) {
    Vec tilde = ff.row(t).transpose();
    for (std::size_t k = 0; k < fb.taps.size(); ++k) {
      const Eigen::Index src = t - fb.start - static_cast<Eigen::Index>(k);
      if (src < 0) break;
      tilde -= fb.taps[k] * hard_c.row(src).transpose();
    }
    const Vec raw = tilde + mu;
    const Vec hard = decision_device(raw, design.domain);
    soft.row(t) = raw.transpose();
    run.decisions.row(t) = hard.transpose();
    hard_c.row(t) = (hard - mu).transpose();
    if (design.domain != DecisionDomain::kReals) {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (hard[i] != input.samples(t, i)) ++run.decision_errors;
      }
    }
  }
  run.aligned = simulate(design.target, EventStream(run.decisions));
  run.soft = simulate(design.target, EventStream(soft));
  Mat delayed = Mat::Zero(steps, design.outputs());
  const Eigen::Index d = design.lookahead;
  if (steps > d) delayed.bottomRows(steps - d) = run.aligned.samples.topRows(steps - d);
  run.published = EventStream(delayed, run.aligned.names);
  return run;
}

}  // namespace dpfilter
