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

// Random instance generators shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dpfilter/error.hpp"
#include "dpfilter/lti.hpp"
#include "dpfilter/random.hpp"

namespace dpfilter::testing {

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
}

// Monic polynomial with random roots of modulus at most `radius`.
inline std::vector<double> random_stable_poly(Rng& rng, int order, double radius) {
  std::vector<cplx> roots;
  while (static_cast<int>(roots.size()) < order) {
    const double mod = radius * std::sqrt(rng.uniform());
    if (order - static_cast<int>(roots.size()) >= 2 && rng.uniform() < 0.5) {
      const cplx r = std::polar(mod, uniform(rng, 0.0, kPi));
      roots.push_back(r);
      roots.push_back(std::conj(r));
    } else {
      roots.push_back(cplx(rng.uniform() < 0.5 ? -mod : mod, 0.0));
    }
  }
  return poly::from_roots(roots, 1.0);
}

inline std::vector<double> random_coeffs(Rng& rng, int length) {
  std::vector<double> c(static_cast<std::size_t>(length));
  for (double& v : c) v = rng.normal();
  return c;
}

inline RationalFilter random_fir(Rng& rng, int max_length) {
  return RationalFilter(random_coeffs(rng, uniform_int(rng, 1, max_length)));
}

inline RationalFilter random_stable_filter(Rng& rng, int max_order) {
  const int order = uniform_int(rng, 0, max_order);
  return RationalFilter(random_coeffs(rng, uniform_int(rng, 1, order + 1)),
                        random_stable_poly(rng, order, 0.85));
}

inline TransferMatrix random_fir_matrix(Rng& rng, int rows, int cols, int max_length) {
  TransferMatrix tm(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) tm(r, c) = random_fir(rng, max_length);
  }
  return tm;
}

inline TransferMatrix random_stable_matrix(Rng& rng, int rows, int cols, int max_order) {
  TransferMatrix tm(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) tm(r, c) = random_stable_filter(rng, max_order);
  }
  return tm;
}

inline Mat random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

// Random state-space system with spectral radius at most `radius`.
inline StateSpace random_state_space(Rng& rng, int n, int p, int m, double radius = 0.9) {
  StateSpace ss{random_matrix(rng, n, n), random_matrix(rng, n, m),
                random_matrix(rng, p, n), random_matrix(rng, p, m)};
  const double rho = spectral_radius(ss.A);
  if (rho > 0.0) ss.A *= radius * uniform(rng, 0.2, 1.0) / rho;
  return ss;
}

inline double max_abs_diff(const SpectrumGrid& a, const SpectrumGrid& b) {
  double d = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) d = std::max(d, (a[q] - b[q]).cwiseAbs().maxCoeff());
  return d;
}

// Error code thrown by fn, empty when nothing is thrown.
template <typename Fn>
std::optional<ErrorCode> code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace dpfilter::testing
