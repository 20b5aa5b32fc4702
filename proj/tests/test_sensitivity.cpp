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

#include <cmath>

#include "doctest.h"
#include "dpfilter/error.hpp"
#include "dpfilter/sensitivity.hpp"
#include "test_support.hpp"

using namespace dpfilter;

namespace {

TransferMatrix aligned_delays(const std::vector<int>& delays) {
  TransferMatrix g(1, static_cast<Eigen::Index>(delays.size()));
  for (std::size_t i = 0; i < delays.size(); ++i) {
    g(0, static_cast<Eigen::Index>(i)) = RationalFilter::delay(delays[i]);
  }
  return g;
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kConfigError;
}

StateSpace similar(const StateSpace& ss, const Mat& t) {
  const Mat ti = t.inverse();
  return StateSpace{ti * ss.A * t, ti * ss.B, ss.C * t, ss.D};
}

}  // namespace

TEST_CASE("SIMO sensitivity") {
  CHECK(simo_sensitivity(TransferMatrix::identity(1), 1.0) == 1.0);
  TransferMatrix f1(1, 1);
  std::vector<double> taps(21, 1.0 / 20.0);
  taps[0] = 0.0;
  f1(0, 0) = RationalFilter(taps);
  CHECK(simo_sensitivity(f1, 4.0) == doctest::Approx(4.0 / std::sqrt(20.0)).epsilon(1e-14));
  CHECK(simo_sensitivity(f1, 8.0) == doctest::Approx(2.0 * simo_sensitivity(f1, 4.0)));
  CHECK(code_of([] { simo_sensitivity(TransferMatrix::identity(2), 1.0); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("diagonal sensitivity") {
  CHECK(diagonal_sensitivity(TransferMatrix::identity(2), Vec::Ones(2)) ==
        doctest::Approx(std::sqrt(2.0)));
  const TransferMatrix g =
      TransferMatrix::diagonal({RationalFilter({1.0}), RationalFilter::delay(1)});
  CHECK(diagonal_sensitivity(g, Vec{{3.0, 4.0}}) == doctest::Approx(5.0).epsilon(1e-15));

  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const TransferMatrix d = TransferMatrix::diagonal(
        {testing::random_fir(rng, 4), testing::random_fir(rng, 4)});
    const Vec k{{testing::uniform(rng, 0.5, 2.0), testing::uniform(rng, 0.5, 2.0)}};
    CHECK(std::abs(diagonal_sensitivity(d, k) - brute_force_sensitivity(d, k, 6)) < 1e-9);
  }
  CHECK(code_of([] { diagonal_sensitivity(aligned_delays({0, 1}), Vec::Ones(2)); }) ==
        ErrorCode::kNotDiagonal);
  TransferMatrix coupled = TransferMatrix::identity(2);
  coupled(0, 1) = RationalFilter({0.1});
  CHECK(code_of([&] { diagonal_sensitivity(coupled, Vec::Ones(2)); }) ==
        ErrorCode::kNotDiagonal);
}

TEST_CASE("MIMO bounds") {
  const TransferMatrix d = TransferMatrix::diagonal({RationalFilter({1.0, 0.5}),
                                                     RationalFilter({2.0}, {1.0, -0.4})});
  const Vec k{{1.5, 0.7}};
  CHECK(mimo_bounds(d, k).lower == doctest::Approx(diagonal_sensitivity(d, k)));
  CHECK(mimo_bounds(realize_state_space(d), k).lower ==
        doctest::Approx(diagonal_sensitivity(d, k)));

  for (int m = 1; m <= 5; ++m) {
    std::vector<int> delays;
    for (int i = 0; i < m; ++i) delays.push_back(3 * i + (i % 2));
    const SensitivityReport r = mimo_bounds(aligned_delays(delays), Vec::Ones(m));
    CHECK(r.lower == doctest::Approx(std::sqrt(static_cast<double>(m))));
    CHECK(r.upper == doctest::Approx(static_cast<double>(m)));
  }
  const SensitivityReport zero = mimo_bounds(aligned_delays({0, 2}), Vec::Zero(2));
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == 0.0);

  StateSpace unstable{Mat::Constant(1, 1, 1.2), Mat::Ones(1, 1), Mat::Ones(1, 1),
                      Mat::Zero(1, 1)};
  CHECK(code_of([&] { mimo_bounds(unstable, Vec::Ones(1)); }) == ErrorCode::kUnstableSystem);
}

TEST_CASE("exact MIMO sensitivity examples") {
  const TransferMatrix d = TransferMatrix::diagonal({RationalFilter({1.0, 0.5}),
                                                     RationalFilter({2.0}, {1.0, -0.4})});
  const Vec k{{1.5, 0.7}};
  const SensitivityReport r = mimo_exact(realize_state_space(d), k);
  REQUIRE(r.exact.has_value());
  CHECK(*r.exact == doctest::Approx(diagonal_sensitivity(d, k)).epsilon(1e-12));

  for (int m = 1; m <= 5; ++m) {
    std::vector<int> delays;
    for (int i = 0; i < m; ++i) delays.push_back(2 * i + 1);
    const SensitivityReport e = mimo_exact(realize_state_space(aligned_delays(delays)), Vec::Ones(m));
    CHECK(*e.exact == doctest::Approx(static_cast<double>(m)).epsilon(1e-12));
    CHECK(*e.exact <= e.upper * (1.0 + 1e-12));
  }
}

TEST_CASE("exact sensitivity matches the brute-force oracle on 2x2 FIR") {
  Rng rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    const TransferMatrix g = testing::random_fir_matrix(rng, 2, 2, 4);
    const Vec k{{testing::uniform(rng, 0.2, 3.0), testing::uniform(rng, 0.2, 3.0)}};
    const SensitivityReport e = mimo_exact(realize_state_space(g), k);
    const double brute = brute_force_sensitivity(g, k, 8);
    CHECK(std::abs(*e.exact - brute) <= 1e-9 * std::max(1.0, brute));
  }
}

TEST_CASE("sandwich on random stable systems") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = testing::uniform_int(rng, 1, 6);
    const int p = testing::uniform_int(rng, 1, 4);
    const int m = testing::uniform_int(rng, 1, 4);
    const StateSpace ss = testing::random_state_space(rng, n, p, m, 0.9);
    Vec k(m);
    for (int i = 0; i < m; ++i) k[i] = testing::uniform(rng, 0.1, 2.0);
    const SensitivityReport r = mimo_exact(ss, k);
    CHECK(r.lower <= *r.exact * (1.0 + 1e-12));
    CHECK(*r.exact <= r.upper * (1.0 + 1e-12));
  }
  for (int trial = 0; trial < 30; ++trial) {
    const int m = testing::uniform_int(rng, 1, 3);
    const TransferMatrix g = testing::random_fir_matrix(rng, testing::uniform_int(rng, 1, 3), m, 3);
    const Vec k = Vec::Ones(m);
    const double brute = brute_force_sensitivity(g, k, 4);
    const SensitivityReport b = mimo_bounds(g, k);
    CHECK(b.lower <= brute * (1.0 + 1e-12));
    CHECK(brute <= b.upper * (1.0 + 1e-12));
  }
}

TEST_CASE("pairwise suprema for three inputs") {
  // With three inputs the pairwise maxima need not be attained by one
  // choice of event times, so the formula is an upper bound on the oracle.
  Rng rng(7);
  int strict = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const TransferMatrix g = testing::random_fir_matrix(rng, 1, 3, 3);
    const Vec k = Vec::Ones(3);
    const double brute = brute_force_sensitivity(g, k, 4);
    const double exact = *mimo_exact(realize_state_space(g), k).exact;
    CHECK(brute <= exact * (1.0 + 1e-12));
    if (exact > brute * (1.0 + 1e-9)) ++strict;
  }
  MESSAGE("three-input instances where the pairwise formula exceeds the oracle: " << strict
          << " of 30");
}

TEST_CASE("similarity invariance and homogeneity") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const StateSpace ss = testing::random_state_space(rng, 4, 2, 3, 0.85);
    const Mat t = testing::random_matrix(rng, 4, 4) + 3.0 * Mat::Identity(4, 4);
    const Vec k{{1.0, 0.5, 2.0}};
    const double a = *mimo_exact(ss, k).exact;
    const double b = *mimo_exact(similar(ss, t), k).exact;
    CHECK(std::abs(a - b) <= 1e-8 * a);
    const SensitivityReport scaled = mimo_exact(ss, 3.0 * k);
    CHECK(*scaled.exact == doctest::Approx(3.0 * a).epsilon(1e-10));
    const SensitivityReport base = mimo_exact(ss, k);
    CHECK(scaled.lower == doctest::Approx(3.0 * base.lower).epsilon(1e-12));
    CHECK(scaled.upper == doctest::Approx(3.0 * base.upper).epsilon(1e-12));
  }
}

TEST_CASE("sensitivity errors") {
  // Strongly non-normal: ||A^s|| stays above one far past the horizon.
  StateSpace slow{Mat{{0.9, 1e6}, {0.0, 0.9}}, Mat::Ones(2, 2), Mat::Ones(1, 2),
                  Mat::Zero(1, 2)};
  CHECK(code_of([&] { mimo_exact(slow, Vec::Ones(2), 1e-10, 50); }) ==
        ErrorCode::kHorizonExceeded);
  CHECK(code_of([] {
          brute_force_sensitivity(TransferMatrix::identity(4), Vec::Ones(4), 2);
        }) == ErrorCode::kOracleTooLarge);
  CHECK(code_of([] {
          brute_force_sensitivity(TransferMatrix::identity(1), Vec::Ones(1), 11);
        }) == ErrorCode::kOracleTooLarge);
  TransferMatrix iir(1, 1);
  iir(0, 0) = RationalFilter({1.0}, {1.0, -0.5});
  CHECK(code_of([&] { brute_force_sensitivity(iir, Vec::Ones(1), 5); }) ==
        ErrorCode::kOracleTooLarge);
  Rng rng(1);
  const TransferMatrix g = testing::random_fir_matrix(rng, 1, 1, 4);
  CHECK(brute_force_sensitivity(g, Vec::Constant(1, 2.0), 5) ==
        doctest::Approx(2.0 * h2_norm(g)).epsilon(1e-14));
}
