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

#include "dpfilter/privacy.hpp"

#include <cmath>
#include <string>

#include "dpfilter/error.hpp"
#include "dpfilter/random.hpp"

namespace dpfilter {

void PrivacySpec::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::kInvalidDelta,
                "delta must lie in (0, 1), got " + std::to_string(delta));
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidPrivacySpec, "epsilon must be positive");
  }
  if (k.size() == 0) {
    throw Error(ErrorCode::kInvalidPrivacySpec, "k must have at least one entry");
  }
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    if (!(k[i] > 0.0) || !std::isfinite(k[i])) {
      throw Error(ErrorCode::kInvalidPrivacySpec,
                  "k entries must be positive (entry " + std::to_string(i) + ")");
    }
  }
}

void PrivacySpec::validate(Eigen::Index channels) const {
  validate();
  if (k.size() != channels) {
    throw Error(ErrorCode::kInvalidPrivacySpec,
                "k has " + std::to_string(k.size()) + " entries but the filter has " +
                    std::to_string(channels) + " inputs");
  }
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double q_inverse(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::kInvalidDelta,
                "delta must lie in (0, 1), got " + std::to_string(delta));
  }
  // Q is decreasing; keep a bracket [lo, hi] with Q(lo) > delta > Q(hi).
  double lo = -40.0;
  double hi = 40.0;
  double x = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double f = q_function(x) - delta;
    if (f == 0.0) return x;
    if (f > 0.0) lo = x; else hi = x;
    const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    double next = x + f / density;  // Newton step, Q' = -density
    if (!(next > lo && next < hi) || density == 0.0) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
    x = next;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

double kappa(const PrivacySpec& spec) {
  spec.validate();
  const double kq = q_inverse(spec.delta);
  const double root = std::sqrt(kq * kq + 2.0 * spec.epsilon);
  // Rationalized form for kq <= 0: no cancellation, and exact at kq = 0.
  if (kq <= 0.0) return 1.0 / (root - kq);
  return (kq + root) / (2.0 * spec.epsilon);
}

double noise_sigma(double sensitivity, const PrivacySpec& spec) {
  if (!(sensitivity >= 0.0)) {
    throw Error(ErrorCode::kInvalidPrivacySpec, "sensitivity must be nonnegative");
  }
  return kappa(spec) * sensitivity;
}

EventStream add_noise(const EventStream& stream, double sigma,
                      std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidPrivacySpec, "noise scale must be nonnegative");
  }
  EventStream out = stream;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (Eigen::Index t = 0; t < out.steps(); ++t) {
    for (Eigen::Index c = 0; c < out.channels(); ++c) {
      out.samples(t, c) += sigma * rng.normal();
    }
  }
  return out;
}

}  // namespace dpfilter
