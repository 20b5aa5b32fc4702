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

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "dpfilter/error.hpp"
#include "dpfilter/markov.hpp"
#include "dpfilter/privacy.hpp"
#include "dpfilter/random.hpp"
#include "dpfilter/sim.hpp"
#include "test_support.hpp"

using namespace dpfilter;
using dpfilter::testing::code_of;

namespace {

PrivacySpec spec_with(const Vec& k, double eps = std::log(5.0)) {
  PrivacySpec p;
  p.epsilon = eps;
  p.delta = 0.05;
  p.k = k;
  return p;
}

SourceFn markov_source(const MarkovSource& src) {
  return [src](std::size_t steps, std::uint64_t seed) { return sample_chain(src, steps, seed); };
}

SourceFn occupancy_source(const OccupancySourceConfig& config) {
  return [config](std::size_t steps, std::uint64_t seed) {
    return synthetic_occupancy_source(config, steps, seed);
  };
}

bool within(double a, double b, double sa, double sb, double z = 3.0) {
  return std::abs(a - b) <= z * std::sqrt(sa * sa + sb * sb);
}

}  // namespace

TEST_CASE("occupancy bank structure") {
  const TransferMatrix bank = occupancy_filter_bank(default_forecast_model());
  REQUIRE(bank.rows() == 3);
  REQUIRE(bank.cols() == 15);
  const Mat dc = bank.dc_gain();
  for (Eigen::Index j = 0; j < 15; ++j) {
    if (j < 5) {
      CHECK(dc(0, j) == doctest::Approx(1.0).epsilon(1e-14));
    } else {
      CHECK(bank(0, j).is_zero());
    }
    if (j >= 4 && j < 12) {
      CHECK(bank(1, j) == occupancy_f2());
    } else {
      CHECK(bank(1, j).is_zero());
    }
    CHECK_FALSE(bank(2, j).is_zero());
    CHECK(bank(2, j).is_stable());
  }
  // f1 averages the previous 20 samples.
  const std::vector<double> h1 = occupancy_f1().impulse_response(22);
  CHECK(h1[0] == 0.0);
  for (int k = 1; k <= 20; ++k) CHECK(h1[k] == doctest::Approx(0.05));
  CHECK(h1[21] == 0.0);

  // The forecast row is the ARX recursion driven by every zone.
  const ForecastModel model = default_forecast_model();
  Rng rng(3);
  Mat u(200, 15);
  for (Eigen::Index t = 0; t < u.rows(); ++t) {
    for (Eigen::Index j = 0; j < 15; ++j) u(t, j) = static_cast<double>(rng.poisson(1.0));
  }
  const Mat y = simulate(bank, EventStream(u)).samples;
  std::vector<double> rec(200, 0.0);
  for (int t = 0; t < 200; ++t) {
    double acc = model.b0.dot(u.row(t).transpose());
    if (t >= 2) acc += model.b1.dot(u.row(t - 2).transpose());
    for (int i = 0; i < 4; ++i) {
      if (t - 1 - i >= 0) acc += model.a[i] * rec[t - 1 - i];
    }
    rec[t] = acc;
    CHECK(y(t, 2) == doctest::Approx(acc).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("f2 matches the Gaussian construction rule") {
  // 3 dB point of exp(-2 pi^2 s^2 f^2) at BT / samples-per-symbol.
  const double bandwidth = 0.5 / 10.0;
  const double s = std::sqrt(std::log(2.0)) / (2.0 * kPi * bandwidth);
  std::vector<double> oracle(20);
  double sum = 0.0;
  for (int n = 0; n < 20; ++n) {
    const double t = n - 9.5;
    oracle[n] = std::exp(-t * t / (2.0 * s * s));
    sum += oracle[n];
  }
  const RationalFilter f2 = occupancy_f2();
  const std::vector<double>& taps = f2.numerator();
  REQUIRE(taps.size() == 20);
  double total = 0.0;
  for (int n = 0; n < 20; ++n) {
    CHECK(taps[n] >= 0.0);
    CHECK(taps[n] == doctest::Approx(oracle[n] / sum).epsilon(1e-13));
    total += taps[n];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  // The truncated taps keep the half-power point close to the design value.
  const double half_power = std::abs(f2.eval(2.0 * kPi * bandwidth));
  CHECK(half_power * half_power == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("bank needs a forecast model") {
  CHECK(code_of([] { occupancy_filter_bank(std::nullopt); }) ==
        ErrorCode::kMissingForecastModel);
  ForecastModel bad = default_forecast_model();
  bad.b0 = Vec::Ones(10);
  bad.b1 = Vec::Ones(10);
  CHECK(code_of([&] { occupancy_filter_bank(bad); }) == ErrorCode::kDimensionMismatch);
  ForecastModel unstable = default_forecast_model();
  unstable.a << 1.5, 0.0, 0.0, 0.0;
  CHECK(code_of([&] { occupancy_filter_bank(unstable); }) == ErrorCode::kUnstableSystem);
}

TEST_CASE("default forecast coefficients are reproducible") {
  const ForecastModel frozen = default_forecast_model();
  const ForecastModel refit = fit_forecast_model(default_forecast_fit_source());
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(refit.a[i] == doctest::Approx(frozen.a[i]).epsilon(1e-9));
  }
  for (Eigen::Index j = 0; j < 15; ++j) {
    CHECK(refit.b0[j] == doctest::Approx(frozen.b0[j]).epsilon(1e-9).scale(1e-3));
    CHECK(refit.b1[j] == doctest::Approx(frozen.b1[j]).epsilon(1e-9).scale(1e-3));
  }
}

TEST_CASE("forecast fit solves the ARX least-squares problem") {
  OccupancySourceConfig cfg;
  cfg.rates = (Vec(3) << 1.0, 2.0, 0.5).finished();
  cfg.period = 96;
  const EventStream data = synthetic_occupancy_source(cfg, 3000, 8);
  const int lo = 5;
  const int hi = 9;
  const ForecastModel fit = fit_forecast_model(data, lo, hi);

  // Normal equations built from scratch.
  const Eigen::Index steps = data.steps();
  std::vector<double> target;
  for (Eigen::Index t = 0; t < steps - hi; ++t) {
    double acc = 0.0;
    for (int h = lo; h < hi; ++h) acc += data.samples.row(t + h).sum();
    target.push_back(acc / (hi - lo));
  }
  Mat gram = Mat::Zero(10, 10);
  Vec rhs = Vec::Zero(10);
  for (std::size_t t = 4; t < target.size(); ++t) {
    Vec x(10);
    for (int i = 0; i < 4; ++i) x[i] = target[t - 1 - i];
    for (int j = 0; j < 3; ++j) {
      x[4 + j] = data.samples(static_cast<Eigen::Index>(t), j);
      x[7 + j] = data.samples(static_cast<Eigen::Index>(t) - 2, j);
    }
    gram += x * x.transpose();
    rhs += x * target[t];
  }
  const Vec theta = gram.ldlt().solve(rhs);
  for (int i = 0; i < 4; ++i) CHECK(fit.a[i] == doctest::Approx(theta[i]).epsilon(1e-7));
  for (int j = 0; j < 3; ++j) {
    CHECK(fit.b0[j] == doctest::Approx(theta[4 + j]).epsilon(1e-6).scale(1e-3));
    CHECK(fit.b1[j] == doctest::Approx(theta[7 + j]).epsilon(1e-6).scale(1e-3));
  }
  CHECK(code_of([&] { fit_forecast_model(data, 3, 3); }) == ErrorCode::kConfigError);
  CHECK(code_of([&] { fit_forecast_model(EventStream(Mat::Zero(20, 3)), lo, hi); }) ==
        ErrorCode::kInsufficientSteps);
}

TEST_CASE("synthetic occupancy source") {
  OccupancySourceConfig zero;
  zero.rates = Vec::Zero(4);
  const EventStream z = synthetic_occupancy_source(zero, 500, 1);
  CHECK(z.samples.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.dt_label == "3 min");

  for (bool modulated : {false, true}) {
    OccupancySourceConfig cfg;
    cfg.rates = (Vec(3) << 0.5, 2.0, 4.0).finished();
    cfg.modulated = modulated;
    const std::size_t steps = 20 * 480;
    const int trials = 20;
    Mat means(trials, 3);
    for (int i = 0; i < trials; ++i) {
      const EventStream s = synthetic_occupancy_source(cfg, steps, derive_seed(5, i));
      CHECK(s.samples.minCoeff() >= 0.0);
      CHECK((s.samples.array() == s.samples.array().round()).all());
      means.row(i) = s.samples.colwise().mean();
    }
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double mean = means.col(j).mean();
      const double sd = std::sqrt((means.col(j).array() - mean).square().sum() / (trials - 1));
      CHECK(std::abs(mean - cfg.rates[j]) <= 3.0 * sd / std::sqrt(trials));
    }
  }
  // The daily cycle shows up in the profile.
  OccupancySourceConfig cfg;
  cfg.rates = Vec::Constant(1, 5.0);
  const EventStream s = synthetic_occupancy_source(cfg, 480 * 40, 9);
  double peak = 0.0;
  double trough = 0.0;
  for (Eigen::Index t = 0; t < s.steps(); ++t) {
    if (t % 480 < 20 || t % 480 >= 460) peak += s.samples(t, 0);
    if (std::abs(t % 480 - 240) < 20) trough += s.samples(t, 0);
  }
  CHECK(peak > 5.0 * trough);

  OccupancySourceConfig bad;
  bad.amplitude = 1.5;
  CHECK(code_of([&] { synthetic_occupancy_source(bad, 10, 1); }) == ErrorCode::kConfigError);
}

TEST_CASE("noiseless zero forcing inverts exactly") {
  const TransferMatrix f = markov_demo_filter();
  const PrivacySpec spec = spec_with(Vec::Ones(2));
  MechanismDesign d = design_zfe(f, spec);
  d.noise_sigma = 0.0;
  const MarkovSource src = server_example(0.3, 0.6);
  // No burn-in: both paths start from rest, so the transient cancels too.
  const MseEstimate e = empirical_mse(d, markov_source(src), 3, 4000, 17, 0);
  CHECK(e.mean < 1e-20);

  // Same with a nonzero input mean carried around the prefilter.
  MechanismDesign op = output_perturbation(f, spec);
  op.noise_sigma = 0.0;
  CHECK(empirical_mse(op, markov_source(src), 2, 1000, 3, 0).mean < 1e-24);
}

TEST_CASE("burn-in rule and short runs") {
  const TransferMatrix f = exponential_smoothing_bank(2, 0.75);
  const PrivacySpec spec = spec_with(Vec::Ones(2));
  const MechanismDesign d = design_zfe(f, spec);
  const std::size_t burn = burn_in_steps(d);
  CHECK(burn % 10 == 0);
  // 0.75^(2k) drops below 1e-8 of the energy after 33 taps.
  CHECK(burn == 330);
  const MarkovSource src = server_example(0.3, 0.6);
  CHECK(code_of([&] { empirical_mse(d, markov_source(src), 2, burn, 1); }) ==
        ErrorCode::kInsufficientSteps);
  CHECK(empirical_mse(d, markov_source(src), 2, burn + 1, 1).burn_in == burn);
  CHECK(code_of([&] { empirical_mse(d, markov_source(src), 0, 10 * burn, 1); }) ==
        ErrorCode::kConfigError);
}

TEST_CASE("zero forcing Monte Carlo matches theory for any input") {
  const TransferMatrix f = exponential_smoothing_bank(2, 0.75);
  const PrivacySpec spec = spec_with(Vec::Ones(2));
  const MechanismDesign d = design_zfe(f, spec);
  OccupancySourceConfig occ;
  occ.rates = (Vec(2) << 1.0, 3.0).finished();
  occ.modulated = true;
  const MseEstimate a = empirical_mse(d, markov_source(server_example(0.3, 0.6)), 10, 20000, 21);
  const MseEstimate b = empirical_mse(d, occupancy_source(occ), 10, 20000, 99);
  MESSAGE("zfe theory " << *d.theory_mse << " markov " << a.mean << " +- " << a.stderr_mean
                        << " occupancy " << b.mean << " +- " << b.stderr_mean);
  CHECK(std::abs(a.mean - *d.theory_mse) <= 3.0 * a.stderr_mean);
  CHECK(std::abs(b.mean - *d.theory_mse) <= 3.0 * b.stderr_mean);
  CHECK(within(a.mean, b.mean, a.stderr_mean, b.stderr_mean));
}

TEST_CASE("LMS smoother Monte Carlo and orthogonality") {
  const std::size_t n = 512;
  LmsOptions options;
  options.grid_n = n;
  const MarkovSource src = server_example(0.3, 0.6);
  const ChainSpectrum cs = chain_spectrum(src, n);
  const TransferMatrix f = markov_demo_filter();
  const PrivacySpec spec = spec_with(Vec::Ones(2));
  const MechanismDesign d =
      assemble_lms(f, cs.centered, cs.mean, spec, LmsMode::kSmoother, options);
  const std::size_t steps = 20000;
  const std::size_t trials = 20;
  const std::uint64_t seed = 31;
  const MseEstimate e = empirical_mse(d, markov_source(src), trials, steps, seed);
  MESSAGE("lms theory " << *d.theory_mse << " empirical " << e.mean << " +- " << e.stderr_mean);
  CHECK(std::abs(e.mean - *d.theory_mse) <= 3.0 * e.stderr_mean);

  // The smoother error is uncorrelated with the released signal at every lag.
  const int max_lag = 10;
  const auto first = static_cast<Eigen::Index>(e.burn_in);
  std::vector<Mat> corr(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    const EventStream u = sample_chain(src, steps, derive_seed(seed, 2 * i));
    const Mat centered = u.samples.rowwise() - cs.mean.transpose();
    const EventStream v = add_noise(simulate(d.prefilter, EventStream(centered)),
                                    d.noise_sigma, derive_seed(seed, 2 * i + 1));
    const EventStream yhat = run_mechanism(d, u, derive_seed(seed, 2 * i + 1));
    const Mat err = simulate(f, u).samples - yhat.samples;
    corr[i] = Mat::Zero(2 * max_lag + 1, 4);
    const Eigen::Index count = static_cast<Eigen::Index>(steps) - first - max_lag;
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
      for (Eigen::Index t = first; t < first + count; ++t) {
        const Eigen::Index s = t - lag;
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            corr[i](lag + max_lag, 2 * a + b) += err(t, a) * v.samples(s, b);
          }
        }
      }
      corr[i].row(lag + max_lag) /= static_cast<double>(count);
    }
  }
  int violations = 0;
  double worst = 0.0;
  for (Eigen::Index r = 0; r < 2 * max_lag + 1; ++r) {
    for (Eigen::Index c = 0; c < 4; ++c) {
      double mean = 0.0;
      for (const Mat& m : corr) mean += m(r, c);
      mean /= trials;
      double ss = 0.0;
      for (const Mat& m : corr) ss += (m(r, c) - mean) * (m(r, c) - mean);
      const double se = std::sqrt(ss / (trials - 1) / trials);
      if (std::abs(mean) > 3.0 * se) ++violations;
      worst = std::max(worst, std::abs(mean) / se);
    }
  }
  // 84 statistics, each a t variable with 19 degrees of freedom: about 0.6
  // exceed 3 by chance.
  MESSAGE("orthogonality: " << violations << " above 3 stderr, worst " << worst);
  CHECK(violations <= 3);
}

TEST_CASE("mechanism ordering on a matched source") {
  const std::size_t n = 512;
  const MarkovSource src = server_example(0.3, 0.6);
  const ChainSpectrum cs = chain_spectrum(src, n);
  ExperimentSpec ex;
  ex.f = exponential_smoothing_bank(2, 0.75);
  ex.privacy = spec_with(Vec::Ones(2));
  ex.mechanisms = {MechanismKind::kWienerSmoother, MechanismKind::kZeroForcing,
                   MechanismKind::kOutputPerturbation};
  ex.source = markov_source(src);
  ex.spectrum = cs.centered;
  ex.mean = cs.mean;
  ex.trials = 6;
  ex.steps = 20000;
  ex.seed = 4;
  ex.lms.grid_n = n;
  const ExperimentReport r = compare_mechanisms(ex);
  REQUIRE(r.results.size() == 3);
  const MechanismResult& lms = r.results[0];
  const MechanismResult& zfe = r.results[1];
  const MechanismResult& op = r.results[2];
  CHECK(*lms.theory_mse <= *zfe.theory_mse);
  CHECK(*zfe.theory_mse <= *op.theory_mse);
  CHECK(lms.empirical_mse <= zfe.empirical_mse + 3.0 * std::hypot(lms.stderr_mse, zfe.stderr_mse));
  CHECK(zfe.empirical_mse <= op.empirical_mse + 3.0 * std::hypot(zfe.stderr_mse, op.stderr_mse));
  CHECK(r.nuclear_bound <= r.zfe_diag_bound);
  for (const MechanismResult& res : r.results) {
    CHECK(res.plot.cols() == 5);
    CHECK(res.plot.rows() == 480);
    CHECK(res.plot(0, 0) == static_cast<double>(res.burn_in));
  }
}

TEST_CASE("comparison on the occupancy bank") {
  ExperimentSpec ex;
  ex.f = occupancy_filter_bank(default_forecast_model());
  PrivacySpec p = spec_with(Vec::Constant(15, 4.0));
  ex.privacy = p;
  OccupancySourceConfig occ;
  occ.rates = Vec::LinSpaced(15, 0.5, 3.0);
  ex.source = occupancy_source(occ);

  SUBCASE("bounds only") {
    const ExperimentReport r = compare_mechanisms(ex);
    CHECK(r.results.empty());
    CHECK(r.zfe_diag_bound == doctest::Approx(zfe_mse_diag_bound(ex.f, p)).epsilon(1e-14));
    CHECK(r.nuclear_bound < r.zfe_diag_bound);
  }
  SUBCASE("zero forcing beats output perturbation, deterministically") {
    ex.mechanisms = {MechanismKind::kOutputPerturbation, MechanismKind::kZeroForcing};
    ex.trials = 2;
    ex.steps = 16000;
    ex.plot_steps = 100;
    const ExperimentReport r = compare_mechanisms(ex);
    REQUIRE(r.results.size() == 2);
    CHECK(*r.results[1].theory_mse <= *r.results[0].theory_mse);
    CHECK(*r.results[1].theory_mse / r.zfe_diag_bound == doctest::Approx(1.0).epsilon(0.01));
    const ExperimentReport again = compare_mechanisms(ex);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(again.results[i].empirical_mse == r.results[i].empirical_mse);
      CHECK(plot_csv(again.results[i]) == plot_csv(r.results[i]));
    }
    const std::string csv = plot_csv(r.results[1]);
    CHECK(csv.rfind("t,y_1,y_2,y_3,yhat_1,yhat_2,yhat_3\n", 0) == 0);
  }
  SUBCASE("LMS needs a spectrum") {
    ex.mechanisms = {MechanismKind::kWienerSmoother};
    CHECK(code_of([&] { compare_mechanisms(ex); }) == ErrorCode::kConfigError);
  }
}
