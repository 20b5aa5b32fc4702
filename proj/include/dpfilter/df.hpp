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

#include <cstdint>

#include "dpfilter/lms.hpp"

namespace dpfilter {

// E / kappa^2 = Q R Q* with E the error covariance of u given v, and
// F* F = S* T S. Q and S are causal and monic.
struct DfFactors {
  MatrixFir q;
  Mat r;
  MatrixFir s;
  Mat t;
  SpectrumGrid q_grid;
  SpectrumGrid s_grid;
  double q_residual = 0.0;
  double s_residual = 0.0;
};

// Error covariance E = P - P G* (G P G* + sigma^2 I)^-1 G P per frequency.
SpectrumGrid df_error_spectrum(const SpectrumGrid& pu, const SpectrumGrid& g, double sigma);

DfFactors df_factorizations(const SpectrumGrid& f, const SpectrumGrid& pu,
                            const SpectrumGrid& g, double sigma,
                            const PrivacySpec& privacy,
                            const MatrixFactorOptions& options = {});

// B = S^-1 Q^-1 by monic power-series inversion of Q S, truncated once the
// tail drops below tol.
MatrixFir optimal_feedback(const MatrixFir& q, const MatrixFir& s,
                           double tol = 1e-12, int max_length = 100000);

double df_theory_mse(const Mat& t, const Mat& r, const PrivacySpec& privacy);

// sum_k Tr(T W_k R W_k^T) = ||T^1/2 W R^1/2||_2^2.
double monic_lemma_value(const Mat& t, const MatrixFir& w, const Mat& r);

Vec decision_device(const Vec& x, DecisionDomain domain);

// DF mechanism reusing the LMS-optimized prefilter.
MechanismDesign assemble_df(const TransferMatrix& f, const SpectrumGrid& pu,
                            const Vec& mean, const PrivacySpec& privacy,
                            DecisionDomain domain, int lookahead = 2,
                            const LmsOptions& options = {});

struct DfRun {
  EventStream published;  // row t holds yhat_{t-d}, zero before d
  EventStream aligned;    // row t holds yhat_t = F uhat
  EventStream soft;       // F u~, the estimate before the decision device
  Mat decisions;          // uhat, T x m
  long decision_errors = 0;
};

// Closed-loop run with the actual decisions fed back.
DfRun run_df_mechanism(const MechanismDesign& design, const EventStream& input,
                       std::uint64_t seed);

}  // namespace dpfilter
