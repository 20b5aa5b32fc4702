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
#include "dpfilter/spectral.hpp"
#include "test_support.hpp"

using namespace dpfilter;

namespace {

constexpr std::size_t kN = 1024;

ScalarSpectrum from_function(auto&& fn, std::size_t n = kN) {
  ScalarSpectrum s;
  s.values.resize(static_cast<Eigen::Index>(n + 1));
  for (std::size_t q = 0; q <= n; ++q) s.values[q] = fn(kPi * q / n);
  return s;
}

ScalarSpectrum magnitude_squared(const RationalFilter& f, std::size_t n = kN) {
  return from_function([&](double w) { return std::norm(f.eval(w)); }, n);
}

RationalFilter moving_average(int len) {
  std::vector<double> num(static_cast<std::size_t>(len) + 1, 1.0 / len);
  num[0] = 0.0;
  return RationalFilter(num);
}

SpectrumGrid from_factor(const MatrixFir& l, const Mat& pe, std::size_t n) {
  SpectrumGrid out(n, pe.rows(), pe.rows());
  for (std::size_t q = 0; q <= n; ++q) {
    const CMat lq = l.eval(out.omega(q));
    out[q] = lq * pe.cast<cplx>() * lq.adjoint();
  }
  return out;
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

}  // namespace

TEST_CASE("Paley-Wiener check") {
  CHECK(paley_wiener_check(from_function([](double) { return 1.0; })));
  CHECK_FALSE(paley_wiener_check(from_function([](double) { return 0.0; })));
  CHECK(paley_wiener_check(
      from_function([](double w) { return std::norm(1.0 - std::polar(1.0, w)); })));
  // Zero on a set of positive measure.
  CHECK_FALSE(paley_wiener_check(from_function([](double w) { return w < 1.0 ? 0.0 : 1.0; })));
  CHECK_FALSE(paley_wiener_check(from_function([](double w) { return w < 1.0 ? -1.0 : 1.0; })));
}

TEST_CASE("scalar spectral factor examples") {
  const ScalarFactor c = scalar_spectral_factor(from_function([](double) { return 4.0; }), 4);
  CHECK(c.filter.numerator()[0] == doctest::Approx(2.0).epsilon(1e-12));
  for (std::size_t k = 1; k < c.filter.numerator().size(); ++k) {
    CHECK(std::abs(c.filter.numerator()[k]) < 1e-12);
  }

  const ScalarFactor ma = scalar_spectral_factor(magnitude_squared(RationalFilter({1.0, 0.5})), 6);
  const std::vector<double>& h = ma.filter.numerator();
  CHECK(std::abs(std::abs(h[0]) - 1.0) < 1e-10);
  CHECK(std::abs(h[1] - 0.5 * h[0]) < 1e-10);
  for (std::size_t k = 2; k < h.size(); ++k) CHECK(std::abs(h[k]) < 1e-10);
  CHECK(ma.filter.is_minimum_phase());

  // Column norm of F = f1 (one row): |F|_2 = |f1|.
  const RationalFilter f1 = moving_average(20);
  const ScalarSpectrum target = from_function([&](double w) { return std::abs(f1.eval(w)); });
  const ScalarFactor g = scalar_spectral_factor(target, 40);
  CHECK(g.grid_error < 1e-4);
  CHECK(g.filter.is_minimum_phase());
  MESSAGE("order-40 FIR truncation error for |f1|: " << g.filter_error);
  CHECK(std::norm(g.grid_response[0]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("adaptive order reaches the target on smooth spectra") {
  const RationalFilter ar({1.0}, {1.0, -0.9});
  FactorOptions opts;
  opts.target_error = 1e-6;
  const ScalarFactor g = scalar_spectral_factor(magnitude_squared(ar), 8, opts);
  CHECK(g.filter_error <= 1e-6);
  CHECK(g.order > 8);
  CHECK(g.filter.is_minimum_phase());
}

TEST_CASE("factor scales with the square root of the spectrum") {
  const ScalarSpectrum s = magnitude_squared(RationalFilter({1.0, -0.3, 0.2}, {1.0, -0.5}));
  const ScalarFactor base = scalar_spectral_factor(s, 30);
  for (double c : {4.0, 0.25}) {
    ScalarSpectrum scaled = s;
    scaled.values *= c;
    const ScalarFactor g = scalar_spectral_factor(scaled, 30);
    for (std::size_t k = 0; k < g.filter.numerator().size(); ++k) {
      CHECK(g.filter.numerator()[k] ==
            doctest::Approx(std::sqrt(c) * base.filter.numerator()[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("minimum phase on random admissible spectra") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const RationalFilter f = testing::random_stable_filter(rng, 3);
    if (f.is_zero()) continue;
    const ScalarSpectrum s = magnitude_squared(f, 256);
    if (!paley_wiener_check(s)) continue;
    const ScalarFactor g = scalar_spectral_factor(s, 24);
    CHECK(g.filter.is_minimum_phase());
    CHECK(g.grid_error < 1e-8);
  }
}

TEST_CASE("factor errors") {
  CHECK(code_of([] { scalar_spectral_factor(from_function([](double) { return 0.0; }), 4); }) ==
        ErrorCode::kNotFactorizable);
  CHECK(code_of([] {
          scalar_spectral_factor(from_function([](double w) { return w < 2.0 ? 0.0 : 1.0; }), 4);
        }) == ErrorCode::kNotFactorizable);
}

TEST_CASE("rational magnitude fit") {
  const RationalFit c = fit_rational_magnitude(from_function([](double) { return 9.0; }), 3);
  CHECK(std::abs(c.residual) < 1e-12);
  CHECK(std::abs(std::norm(c.filter.eval(0.4)) - 9.0) < 1e-10);

  // AR(2) with poles 0.8 e^{+-0.6j}.
  const std::vector<cplx> poles{std::polar(0.8, 0.6), std::polar(0.8, -0.6)};
  const RationalFilter ar({0.7}, poly::from_roots(poles, 1.0));
  const RationalFit fit = fit_rational_magnitude(magnitude_squared(ar), 2);
  const std::vector<cplx> found = poly::roots(fit.filter.denominator());
  REQUIRE(found.size() == 2);
  for (const cplx& p : poles) {
    double best = 1e9;
    for (const cplx& r : found) best = std::min(best, std::abs(r - p));
    CHECK(best < 1e-3);
  }
  CHECK(std::abs(fit.residual) < 1e-9);
  CHECK(fit.filter.is_stable());

  const ScalarSpectrum smooth =
      magnitude_squared(RationalFilter({1.0, 0.6, 0.3}, {1.0, -0.2}));
  double prev = 1e300;
  for (int order : {2, 4, 8, 16}) {
    const RationalFit f = fit_rational_magnitude(smooth, order);
    CHECK(f.residual <= prev + 1e-15);
    CHECK(f.residual >= -1e-12);
    CHECK(f.filter.is_stable());
    prev = f.residual;
  }
  CHECK(code_of([] { fit_rational_magnitude(from_function([](double) { return 0.0; }), 2); }) ==
        ErrorCode::kFitFailed);
}

TEST_CASE("matrix factorization of a white spectrum") {
  const Mat sigma{{2.0, 0.5}, {0.5, 1.0}};
  SpectrumGrid p(64, 2, 2);
  for (std::size_t q = 0; q <= 64; ++q) p[q] = sigma.cast<cplx>();
  const MatrixFactorization f = matrix_canonical_factor(p);
  CHECK((f.innovation - sigma).norm() < 1e-12);
  CHECK((f.factor.taps[0] - Mat::Identity(2, 2)).norm() < 1e-12);
  for (std::size_t k = 1; k < f.factor.taps.size(); ++k) CHECK(f.factor.taps[k].norm() < 1e-12);
}

TEST_CASE("matrix factorization round trip from a known factor") {
  const Mat theta{{0.5, -0.3}, {0.2, 0.4}};
  const Mat pe{{1.5, 0.3}, {0.3, 0.8}};
  MatrixFir l0{0, {Mat::Identity(2, 2), theta}};
  const SpectrumGrid p = from_factor(l0, pe, kN);
  const MatrixFactorization f = matrix_canonical_factor(p);
  CHECK((f.innovation - pe).norm() < 1e-5);
  CHECK((f.factor.at(0) - Mat::Identity(2, 2)).norm() < 1e-5);
  CHECK((f.factor.at(1) - theta).norm() < 1e-5);
  for (int k = 2; k < 10; ++k) CHECK(f.factor.at(k).norm() < 1e-5);
  CHECK(f.residual < 1e-6);

  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    MatrixFir l{0, {Mat::Identity(3, 3)}};
    for (int k = 1; k <= 3; ++k) l.taps.push_back(0.25 * testing::random_matrix(rng, 3, 3));
    const Mat a = testing::random_matrix(rng, 3, 3);
    const SpectrumGrid pr = from_factor(l, a * a.transpose() + 0.5 * Mat::Identity(3, 3), 256) +
                            SpectrumGrid(from_factor(MatrixFir{0, {Mat::Identity(3, 3)}},
                                                     0.1 * Mat::Identity(3, 3), 256));
    const MatrixFactorization fr = matrix_canonical_factor(pr);
    CHECK(fr.residual < 1e-6);
    CHECK(spectral_radius(fr.innovation) > 0.0);
  }
}

TEST_CASE("1x1 matrix factorization agrees with the scalar factor") {
  const RationalFilter f({1.0, -0.4, 0.3}, {1.0, -0.6});
  const ScalarSpectrum s = magnitude_squared(f);
  SpectrumGrid p(kN, 1, 1);
  for (std::size_t q = 0; q <= kN; ++q) p[q](0, 0) = s.values[q];
  const MatrixFactorization m = matrix_canonical_factor(p);
  const ScalarFactor g = scalar_spectral_factor(s, 60);
  const double g0 = g.filter.numerator()[0];
  CHECK(m.innovation(0, 0) == doctest::Approx(g0 * g0).epsilon(1e-8));
  for (int k = 0; k < 20; ++k) {
    CHECK(std::abs(m.factor.at(k)(0, 0) - g.filter.numerator()[k] / g0) < 1e-8);
  }
}

TEST_CASE("matrix factorization errors") {
  SpectrumGrid singular(32, 2, 2);
  for (std::size_t q = 0; q <= 32; ++q) singular[q] = CMat::Ones(2, 2);
  CHECK(code_of([&] { matrix_canonical_factor(singular); }) == ErrorCode::kNotPositiveDefinite);

  const SpectrumGrid p =
      from_factor(MatrixFir{0, {Mat::Identity(2, 2), 0.9 * Mat::Identity(2, 2)}},
                  Mat::Identity(2, 2), 256);
  MatrixFactorOptions opts;
  opts.max_order = 3;
  CHECK(code_of([&] { matrix_canonical_factor(p, opts); }) == ErrorCode::kFactorizationStalled);
}
