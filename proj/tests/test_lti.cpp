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
#include "dpfilter/lti.hpp"
#include "test_support.hpp"

using namespace dpfilter;
using dpfilter::testing::max_abs_diff;

namespace {

RationalFilter moving_average(int len) {
  std::vector<double> num(static_cast<std::size_t>(len) + 1, 1.0 / len);
  num[0] = 0.0;
  return RationalFilter(num);
}

TransferMatrix scalar(const RationalFilter& f) {
  TransferMatrix tm(1, 1);
  tm(0, 0) = f;
  return tm;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kConfigError;
}

}  // namespace

TEST_CASE("freq_response basic values") {
  const SpectrumGrid id = freq_response(TransferMatrix::identity(1), 16);
  for (std::size_t q = 0; q <= 16; ++q) CHECK(std::abs(id[q](0, 0) - 1.0) == 0.0);

  const SpectrumGrid delay = freq_response(RationalFilter::delay(1), 16);
  CHECK(std::abs(delay[16](0, 0) - cplx(-1.0, 0.0)) < 1e-15);

  const SpectrumGrid f1 = freq_response(moving_average(20), 64);
  CHECK(std::abs(f1[0](0, 0) - 1.0) < 1e-14);

  CHECK(code_of([] { freq_response(TransferMatrix::identity(1), 4); }) ==
        ErrorCode::kDimensionMismatch);
  CHECK(code_of([] { freq_response(RationalFilter({1.0}, {1.0, -1.0}), 16); }) ==
        ErrorCode::kUnstableSystem);
}

TEST_CASE("state-space and transfer-matrix responses agree") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const TransferMatrix tm = testing::random_stable_matrix(rng, 2, 3, 3);
    const StateSpace ss = realize_state_space(tm);
    CHECK(max_abs_diff(freq_response(tm, 64), freq_response(ss, 64)) < 1e-8);
  }
}

TEST_CASE("h2 norm examples") {
  CHECK(h2_norm(moving_average(20)) == doctest::Approx(1.0 / std::sqrt(20.0)).epsilon(1e-14));
  CHECK(h2_norm(TransferMatrix::identity(3)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(h2_norm(realize_state_space(TransferMatrix::identity(3))) ==
        doctest::Approx(std::sqrt(3.0)));

  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const TransferMatrix tm = testing::random_fir_matrix(rng, 2, 2, 5);
    const double gram = h2_norm(realize_state_space(tm));
    const double freq = h2_norm(freq_response(tm, 256));
    CHECK(std::abs(gram - freq) < 1e-8 * std::max(1.0, freq));
  }
}

TEST_CASE("Gramian and frequency paths agree on random stable systems") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = testing::uniform_int(rng, 1, 6);
    const int p = testing::uniform_int(rng, 1, 4);
    const int m = testing::uniform_int(rng, 1, 4);
    const StateSpace ss = testing::random_state_space(rng, n, p, m, 0.9);
    const double gram = h2_norm(ss);
    const double freq = h2_norm(freq_response(ss, 1024));
    CHECK(std::abs(gram - freq) <= 1e-6 * gram);
  }
}

TEST_CASE("per-entry decomposition of the H2 norm") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const TransferMatrix tm = testing::random_stable_matrix(rng, 3, 2, 3);
    double entries = 0.0;
    for (Eigen::Index r = 0; r < 3; ++r) {
      for (Eigen::Index c = 0; c < 2; ++c) entries += std::pow(h2_norm(tm(r, c)), 2);
    }
    const double whole = h2_norm(realize_state_space(tm));
    CHECK(whole * whole == doctest::Approx(entries).epsilon(1e-9));
  }
}

TEST_CASE("observability Gramian") {
  StateSpace zero{Mat::Zero(2, 2), Mat::Ones(2, 1), Mat{{1.0, 2.0}}, Mat::Zero(1, 1)};
  const Mat p0 = observability_gramian(zero);
  CHECK((p0 - zero.C.transpose() * zero.C).norm() < 1e-15);

  StateSpace scalar_ss{Mat::Constant(1, 1, 0.5), Mat::Ones(1, 1), Mat::Ones(1, 1),
                       Mat::Zero(1, 1)};
  CHECK(observability_gramian(scalar_ss)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const StateSpace ss = testing::random_state_space(rng, 5, 2, 2, 0.8);
    // Truncated-series oracle.
    Mat sum = Mat::Zero(5, 5);
    Mat power = Mat::Identity(5, 5);
    for (int t = 0; t < 400; ++t) {
      sum += power.transpose() * ss.C.transpose() * ss.C * power;
      power = ss.A * power;
    }
    const Mat p = observability_gramian(ss);
    CHECK((p - sum).norm() <= 1e-8 * sum.norm());
    const Mat res = ss.A.transpose() * p * ss.A - p + ss.C.transpose() * ss.C;
    CHECK(res.norm() <= 1e-10 * p.norm());
  }

  StateSpace unstable{Mat::Constant(1, 1, 1.5), Mat::Ones(1, 1), Mat::Ones(1, 1),
                      Mat::Zero(1, 1)};
  CHECK(code_of([&] { observability_gramian(unstable); }) == ErrorCode::kLyapunovFailure);
  CHECK(code_of([&] { h2_norm(unstable); }) == ErrorCode::kUnstableSystem);
}

TEST_CASE("simulate") {
  Mat data(30, 1);
  for (int t = 0; t < 30; ++t) data(t, 0) = std::sin(0.3 * t);
  const EventStream u(data);
  const EventStream same = simulate(TransferMatrix::identity(1), u);
  CHECK((same.samples - data).norm() == 0.0);

  Mat impulse = Mat::Zero(5, 1);
  impulse(0, 0) = 1.0;
  const EventStream d = simulate(scalar(RationalFilter::delay(1)), EventStream(impulse));
  CHECK(d.samples(1, 0) == 1.0);
  CHECK(d.samples.sum() == 1.0);

  const EventStream ones = simulate(scalar(moving_average(20)), EventStream(Mat::Ones(40, 1)));
  for (int t = 20; t < 40; ++t) CHECK(ones.samples(t, 0) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(code_of([&] { simulate(TransferMatrix::identity(2), u); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("simulate on all three system forms agrees") {
  Rng rng(8);
  const TransferMatrix tm = testing::random_stable_matrix(rng, 2, 2, 3);
  const StateSpace ss = realize_state_space(tm);
  const MatrixFir fir = impulse_response(tm, 400);
  const EventStream u(testing::random_matrix(rng, 300, 2));
  const Mat a = simulate(tm, u).samples;
  CHECK((simulate(ss, u).samples - a).norm() < 1e-9 * a.norm());
  CHECK((simulate(fir, u).samples - a).norm() < 1e-9 * a.norm());
}

TEST_CASE("impulse response matches inverse transform of the grid") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const TransferMatrix tm = testing::random_fir_matrix(rng, 2, 3, 6);
    const MatrixFir from_grid = taps_from_grid(freq_response(tm, 32), 0, 8);
    for (Eigen::Index c = 0; c < 3; ++c) {
      Mat impulse = Mat::Zero(9, 3);
      impulse(0, c) = 1.0;
      const EventStream y = simulate(tm, EventStream(impulse));
      for (int t = 0; t < 9; ++t) {
        CHECK((y.samples.row(t).transpose() - from_grid.taps[t].col(c)).norm() < 1e-6);
      }
    }
  }
}

TEST_CASE("realization examples") {
  const StateSpace fir = realize_state_space(scalar(RationalFilter({1.0, 2.0})));
  const MatrixFir h = impulse_response(fir, 4);
  CHECK(h.taps[0](0, 0) == 1.0);
  CHECK(h.taps[1](0, 0) == 2.0);
  CHECK(h.taps[2](0, 0) == 0.0);

  const StateSpace geo = realize_state_space(scalar(RationalFilter({1.0}, {1.0, -0.5})));
  CHECK(geo.A(0, 0) == 0.5);
  CHECK(geo.B(0, 0) == 1.0);
  CHECK(geo.C(0, 0) == 0.5);
  CHECK(geo.D(0, 0) == 1.0);
  const MatrixFir g = impulse_response(geo, 5);
  for (int t = 0; t < 5; ++t) CHECK(g.taps[t](0, 0) == doctest::Approx(std::pow(0.5, t)));

  CHECK(code_of([] { RationalFilter({1.0}, {0.0, 1.0}); }) ==
        ErrorCode::kImproperTransferFunction);
}

TEST_CASE("rational filter algebra") {
  const RationalFilter a({1.0, 0.5});
  const RationalFilter b({1.0}, {1.0, -0.3});
  const double w = 0.7;
  CHECK(std::abs((a * b).eval(w) - a.eval(w) * b.eval(w)) < 1e-14);
  CHECK(std::abs((a + b).eval(w) - (a.eval(w) + b.eval(w))) < 1e-14);
  CHECK(std::abs(a.inverse().eval(w) * a.eval(w) - 1.0) < 1e-14);
  CHECK(a.is_minimum_phase());
  CHECK_FALSE(RationalFilter({0.5, 1.0}).is_minimum_phase());
  CHECK(b.is_stable());
  const std::vector<double> c = poly::from_roots({cplx(0.5, 0.2), cplx(0.5, -0.2)}, 2.0);
  CHECK(poly::max_root_modulus(c) == doctest::Approx(std::abs(cplx(0.5, 0.2))));
}

TEST_CASE("memory length") {
  CHECK(memory_length(RationalFilter({1.0, 1.0, 1.0})) == 3);
  const std::size_t len = memory_length(RationalFilter({1.0}, {1.0, -0.5}), 1e-8);
  // Tail energy after k samples is 0.25^k.
  CHECK(len == static_cast<std::size_t>(std::ceil(std::log(1e-8) / std::log(0.25))));
}
