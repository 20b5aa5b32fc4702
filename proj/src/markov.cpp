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

#include "dpfilter/markov.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "dpfilter/error.hpp"
#include "dpfilter/random.hpp"

namespace dpfilter {

void MarkovSource::validate() const {
  const Eigen::Index n = transition.rows();
  if (n == 0 || transition.cols() != n) {
    throw Error(ErrorCode::kConfigError, "transition matrix must be square and nonempty");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (transition.col(j).minCoeff() < 0.0 ||
        std::abs(transition.col(j).sum() - 1.0) > 1e-12) {
      throw Error(ErrorCode::kConfigError,
                  "transition column " + std::to_string(j) + " is not a distribution");
    }
  }
  for (int s : selectors) {
    if (s < 0 || s >= n) {
      throw Error(ErrorCode::kConfigError, "selector " + std::to_string(s) + " out of range");
    }
  }
}

MarkovSource server_example(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::kNotErgodic, "server example needs alpha, beta in (0, 1)");
  }
  MarkovSource src;
  src.transition = Mat::Zero(4, 4);
  src.transition(0, 0) = 1.0 - alpha;
  src.transition(1, 0) = alpha;
  src.transition(2, 1) = 1.0;
  src.transition(2, 2) = 1.0 - beta;
  src.transition(3, 2) = beta;
  src.transition(0, 3) = 1.0;
  src.selectors = {1, 3};
  return src;
}

bool is_ergodic(const MarkovSource& src) {
  src.validate();
  Eigen::EigenSolver<Mat> eig(src.transition, false);
  int on_circle = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    if (std::abs(eig.eigenvalues()[i]) >= 1.0 - 1e-9) ++on_circle;
  }
  return on_circle == 1;
}

namespace {

void require_ergodic(const MarkovSource& src) {
  if (!is_ergodic(src)) {
    throw Error(ErrorCode::kNotErgodic, "chain is reducible or periodic");
  }
}

}  // namespace

Vec stationary_distribution(const MarkovSource& src) {
  require_ergodic(src);
  const Eigen::Index n = src.states();
  // (Pi - I) p = 0 with the last equation replaced by sum(p) = 1.
  Mat a = src.transition - Mat::Identity(n, n);
  a.row(n - 1).setOnes();
  Vec rhs = Vec::Zero(n);
  rhs[n - 1] = 1.0;
  Vec p = a.fullPivLu().solve(rhs);
  // One refinement step against the original equations.
  Vec r = rhs - a * p;
  p += a.fullPivLu().solve(r);
  return p;
}

Vec stationary_distribution_power(const MarkovSource& src, double tol, int max_iter) {
  require_ergodic(src);
  const Eigen::Index n = src.states();
  Vec p = Vec::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < max_iter; ++it) {
    Vec next = src.transition * p;
    next /= next.sum();
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = next;
    if (change <= tol) return p;
  }
  throw Error(ErrorCode::kNotErgodic, "power iteration did not settle");
}

ChainSpectrum chain_spectrum(const MarkovSource& src, std::size_t n) {
  const Vec p = stationary_distribution(src);
  const Eigen::Index s = src.states();
  const Mat d = p.asDiagonal();
  const Mat c = d - src.transition * d * src.transition.transpose();
  // Deflate the unit eigenvalue; the centered state never excites it.
  const Mat pi0 = src.transition - p * Vec::Ones(s).transpose();
  Mat sel = Mat::Zero(src.channels(), s);
  for (Eigen::Index i = 0; i < src.channels(); ++i) sel(i, src.selectors[static_cast<std::size_t>(i)]) = 1.0;
  ChainSpectrum out;
  out.centered = SpectrumGrid(n, src.channels(), src.channels());
  out.mean = sel * p;
  const CMat cc = c.cast<cplx>();
  const CMat selc = sel.cast<cplx>();
  for (std::size_t q = 0; q <= n; ++q) {
    const cplx z = std::polar(1.0, out.centered.omega(q));
    const CMat resolvent = z * CMat::Identity(s, s) - pi0.cast<cplx>();
    // sel * H0, via the transposed system.
    const CMat h = resolvent.transpose().partialPivLu().solve(selc.transpose()).transpose();
    CMat sample = h * cc * h.adjoint();
    out.centered[q] = 0.5 * (sample + sample.adjoint());
  }
  return out;
}

EventStream sample_chain(const MarkovSource& src, std::size_t steps,
                         std::uint64_t seed) {
  const Vec p = stationary_distribution(src);
  const Eigen::Index s = src.states();
  Mat cumulative(s, s);
  for (Eigen::Index j = 0; j < s; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s; ++i) {
      acc += src.transition(i, j);
      cumulative(i, j) = acc;
    }
  }
  Rng rng(seed);
  auto draw = [&](auto&& cdf) {
    const double u = rng.uniform();
    for (Eigen::Index i = 0; i < s; ++i) {
      if (u < cdf(i)) return i;
    }
    return s - 1;
  };
  Vec p_cdf(s);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s; ++i) p_cdf[i] = (acc += p[i]);
  Eigen::Index state = draw([&](Eigen::Index i) { return p_cdf[i]; });
  Mat data = Mat::Zero(static_cast<Eigen::Index>(steps), src.channels());
  for (std::size_t t = 0; t < steps; ++t) {
    for (Eigen::Index c = 0; c < src.channels(); ++c) {
      if (src.selectors[static_cast<std::size_t>(c)] == state) data(static_cast<Eigen::Index>(t), c) = 1.0;
    }
    const Eigen::Index from = state;
    state = draw([&](Eigen::Index i) { return cumulative(i, from); });
  }
  std::vector<std::string> names;
  for (int sel : src.selectors) names.push_back("state" + std::to_string(sel + 1));
  return EventStream(std::move(data), names);
}

TransferMatrix markov_demo_filter() {
  std::vector<double> taps(9, 1.0 / 8.0);
  taps[0] = 0.0;
  const RationalFilter ma(taps);
  return TransferMatrix::diagonal({ma, ma});
}

}  // namespace dpfilter
