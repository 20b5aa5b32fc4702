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

#include "dpfilter/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <Eigen/QR>

#include "dpfilter/df.hpp"
#include "dpfilter/error.hpp"
#include "dpfilter/random.hpp"

namespace dpfilter {

namespace {

// Frozen f2 taps. The unit test rebuilds them from the Gaussian rule.
constexpr double kF2[20] = {
    0.00024392206590853212, 0.00087861201930077677, 0.0027447623030739366,
    0.0074365908985582043,  0.017474493278717449,   0.035612039077473803,
    0.062943464211348166,   0.096486375299619925,   0.12827525647888902,
    0.14790448436711021,    0.14790448436711021,    0.12827525647888902,
    0.096486375299619925,   0.062943464211348166,   0.035612039077473803,
    0.017474493278717449,   0.0074365908985582043,  0.0027447623030739366,
    0.00087861201930077677, 0.00024392206590853212};

// Toolkit-fitted forecast coefficients: fit_forecast_model() applied to
// default_forecast_fit_source(). The unit tests refit and compare.
constexpr double kForecastA[4] = {
    1.4747504093778916, -0.26962184835365921, -0.11981321053874552,
    -0.091669043374028175};
constexpr double kForecastB0[15] = {
    0.014517530492439227, 0.0026848603591898808, 0.0082205920912701309,
    -0.0027347540643140968, -0.0079268047903812752, -0.0057793907270811832,
    0.0091921382771250754, 6.04338250301701e-05, 0.01259284779760401,
    0.0035080749779737054, 0.0027782138623965642, 0.0096705703956280701,
    0.0012860596988420747, -0.0013655738648375077, 0.0011897573932717386};
constexpr double kForecastB1[15] = {
    -0.00079679179524517921, 0.0044024420305051578, 0.0042758135006570079,
    0.00093482489065625622, -0.0016401457076582857, 0.0026199013166543338,
    -0.005442682034609618, 0.0051735811869493588, -0.0036252567241752535,
    0.0034342665475225564, 0.0083974161564692989, 0.0040581952510857682,
    -0.00048886964868866253, 0.0046723964408010368, -1.307886931150339e-05};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::size_t fir_span(const MatrixFir& fir) {
  return fir.taps.size() + static_cast<std::size_t>(std::max(0, -fir.start));
}

std::size_t matrix_memory(const TransferMatrix& tm) {
  std::size_t out = 0;
  for (Eigen::Index r = 0; r < tm.rows(); ++r) {
    for (Eigen::Index c = 0; c < tm.cols(); ++c) {
      out = std::max(out, memory_length(tm(r, c)));
    }
  }
  return out;
}

bool structured_zfe(const MechanismDesign& design) {
  return design.kind == MechanismKind::kZeroForcing && design.prefilter.is_diagonal();
}

}  // namespace

RationalFilter occupancy_f1() {
  std::vector<double> num(21, 1.0 / 20.0);
  num[0] = 0.0;
  return RationalFilter(num);
}

RationalFilter occupancy_f2() {
  return RationalFilter(std::vector<double>(std::begin(kF2), std::end(kF2)));
}

std::vector<RationalFilter> occupancy_f3(const ForecastModel& model) {
  if (model.a.size() != 4 || model.b0.size() != model.b1.size() || model.b0.size() == 0) {
    throw Error(ErrorCode::kConfigError,
                "forecast model needs 4 AR coefficients and matching b0, b1");
  }
  std::vector<double> den{1.0, -model.a[0], -model.a[1], -model.a[2], -model.a[3]};
  std::vector<RationalFilter> out;
  for (Eigen::Index j = 0; j < model.b0.size(); ++j) {
    out.emplace_back(std::vector<double>{model.b0[j], 0.0, model.b1[j]}, den);
  }
  if (!out.front().is_stable()) {
    throw Error(ErrorCode::kUnstableSystem, "forecast model has unstable AR part");
  }
  return out;
}

TransferMatrix occupancy_filter_bank(const std::optional<ForecastModel>& model,
                                     Eigen::Index m) {
  if (!model) {
    throw Error(ErrorCode::kMissingForecastModel,
                "the forecast row needs coefficients a1..a4, b0, b1");
  }
  if (m < 12) throw Error(ErrorCode::kConfigError, "the bank needs at least 12 zones");
  if (model->b0.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "forecast weights do not match zone count");
  }
  TransferMatrix bank(3, m);
  const RationalFilter f1 = occupancy_f1();
  const RationalFilter f2 = occupancy_f2();
  for (Eigen::Index j = 0; j < 5; ++j) bank(0, j) = f1;
  for (Eigen::Index j = 4; j < 12; ++j) bank(1, j) = f2;
  const std::vector<RationalFilter> f3 = occupancy_f3(*model);
  for (Eigen::Index j = 0; j < m; ++j) bank(2, j) = f3[static_cast<std::size_t>(j)];
  return bank;
}

TransferMatrix exponential_smoothing_bank(Eigen::Index m, double a) {
  if (m <= 0 || !(a >= 0.0 && a < 1.0)) {
    throw Error(ErrorCode::kConfigError, "smoothing bank needs m > 0 and 0 <= a < 1");
  }
  return TransferMatrix::diagonal(
      std::vector<RationalFilter>(static_cast<std::size_t>(m), RationalFilter({1.0 - a}, {1.0, -a})));
}

EventStream synthetic_occupancy_source(const OccupancySourceConfig& config,
                                       std::size_t steps, std::uint64_t seed) {
  const Eigen::Index m = config.rates.size();
  if (m == 0 || config.period <= 0 || config.amplitude < 0.0 || config.amplitude > 1.0 ||
      config.depth < 0.0 || config.depth > 1.0 || config.switch_prob < 0.0 ||
      config.switch_prob > 1.0 || (config.rates.array() < 0.0).any()) {
    throw Error(ErrorCode::kConfigError, "invalid occupancy source parameters");
  }
  Rng rng(seed);
  Mat out = Mat::Zero(static_cast<Eigen::Index>(steps), m);
  // Symmetric switching keeps the modulator's mean multiplier at 1.
  bool high = rng.uniform() < 0.5;
  for (std::size_t t = 0; t < steps; ++t) {
    const double angle = 2.0 * kPi * (static_cast<double>(t) - config.phase) / config.period;
    double scale = 1.0 + config.amplitude * std::cos(angle);
    if (config.modulated) {
      scale *= high ? 1.0 + config.depth : 1.0 - config.depth;
      if (rng.uniform() < config.switch_prob) high = !high;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      out(static_cast<Eigen::Index>(t), i) =
          static_cast<double>(rng.poisson(config.rates[i] * scale));
    }
  }
  EventStream stream(std::move(out), EventStream::default_names(m, "zone"));
  stream.dt_label = config.dt_label;
  return stream;
}

ForecastModel fit_forecast_model(const EventStream& data, int lead_lo, int lead_hi) {
  const Eigen::Index m = data.channels();
  const Eigen::Index steps = data.steps();
  if (lead_lo < 0 || lead_hi <= lead_lo) {
    throw Error(ErrorCode::kConfigError, "forecast window must be nonempty");
  }
  const Vec total = data.samples.rowwise().sum();
  const Eigen::Index usable = steps - lead_hi;
  if (usable < 4 + 2 * m + 8) {
    throw Error(ErrorCode::kInsufficientSteps, "record too short for the forecast fit");
  }
  Vec target(usable);
  for (Eigen::Index t = 0; t < usable; ++t) {
    target[t] = total.segment(t + lead_lo, lead_hi - lead_lo).mean();
  }
  const Eigen::Index rows = usable - 4;
  Mat reg(rows, 4 + 2 * m);
  Vec rhs(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = r + 4;
    for (int i = 0; i < 4; ++i) reg(r, i) = target[t - 1 - i];
    reg.block(r, 4, 1, m) = data.samples.row(t);
    reg.block(r, 4 + m, 1, m) = data.samples.row(t - 2);
    rhs[r] = target[t];
  }
  const Vec theta = reg.colPivHouseholderQr().solve(rhs);
  if (!theta.allFinite()) throw Error(ErrorCode::kFitFailed, "forecast fit is singular");
  ForecastModel model{theta.head(4), theta.segment(4, m), theta.segment(4 + m, m)};
  std::vector<double> den{1.0, -model.a[0], -model.a[1], -model.a[2], -model.a[3]};
  if (poly::max_root_modulus(den) >= 1.0) {
    throw Error(ErrorCode::kFitFailed, "fitted forecast model is unstable");
  }
  return model;
}

EventStream default_forecast_fit_source() {
  OccupancySourceConfig config;
  config.rates = Vec::LinSpaced(15, 0.5, 3.0);
  config.modulated = true;
  return synthetic_occupancy_source(config, 60 * 480, 20260101);
}

ForecastModel default_forecast_model() {
  ForecastModel model;
  model.a = Eigen::Map<const Vec>(kForecastA, 4);
  model.b0 = Eigen::Map<const Vec>(kForecastB0, 15);
  model.b1 = Eigen::Map<const Vec>(kForecastB1, 15);
  return model;
}

std::size_t burn_in_steps(const MechanismDesign& design) {
  std::size_t mem = std::max(matrix_memory(design.target), matrix_memory(design.prefilter));
  // The estimate sees G^-1 only through F G^-1, so the postfilter entries
  // set the memory even when the run applies G^-1 on its own.
  if (design.rational_postfilter) {
    mem = std::max(mem, matrix_memory(*design.rational_postfilter));
  }
  if (design.fir_postfilter) mem = std::max(mem, fir_span(*design.fir_postfilter));
  if (design.feedback) mem = std::max(mem, fir_span(*design.feedback));
  return 10 * mem;
}

EventStream run_mechanism(const MechanismDesign& design, const EventStream& input,
                          std::uint64_t seed) {
  if (design.kind == MechanismKind::kDecisionFeedback) {
    return run_df_mechanism(design, input, seed).aligned;
  }
  const Eigen::Index m = design.inputs();
  if (input.channels() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "input stream has the wrong channel count");
  }
  const Vec mu = design.input_mean.size() == m ? design.input_mean : Vec::Zero(m);
  const Mat centered = input.samples.rowwise() - mu.transpose();
  const EventStream v =
      add_noise(simulate(design.prefilter, EventStream(centered)), design.noise_sigma, seed);

  EventStream out;
  if (structured_zfe(design)) {
    // F (G^-1 v): one all-pole pass per channel instead of p x m rational entries.
    Mat z(v.steps(), v.channels());
    for (Eigen::Index i = 0; i < v.channels(); ++i) {
      z.col(i) = design.prefilter(i, i).inverse().apply(v.samples.col(i));
    }
    out = simulate(design.target, EventStream(z));
  } else if (design.rational_postfilter) {
    out = simulate(*design.rational_postfilter, v);
  } else if (design.fir_postfilter) {
    out = simulate(*design.fir_postfilter, v);
  } else {
    throw Error(ErrorCode::kConfigError, "design has no postfilter");
  }
  if (mu.size() > 0 && mu.cwiseAbs().maxCoeff() > 0.0) {
    const Vec offset = design.target.dc_gain() * mu;
    out.samples.rowwise() += offset.transpose();
  }
  out.dt_label = input.dt_label;
  return out;
}

MseEstimate empirical_mse(const MechanismDesign& design, const SourceFn& source,
                          std::size_t trials, std::size_t steps, std::uint64_t seed,
                          std::optional<std::size_t> burn_in) {
  if (trials == 0) throw Error(ErrorCode::kConfigError, "need at least one trial");
  MseEstimate est;
  est.burn_in = burn_in ? *burn_in : burn_in_steps(design);
  if (steps <= est.burn_in) {
    throw Error(ErrorCode::kInsufficientSteps,
                std::to_string(steps) + " steps do not exceed the burn-in of " +
                    std::to_string(est.burn_in));
  }
  const auto first = static_cast<Eigen::Index>(est.burn_in);
  const auto kept = static_cast<Eigen::Index>(steps - est.burn_in);
  for (std::size_t i = 0; i < trials; ++i) {
    const EventStream u = source(steps, derive_seed(seed, 2 * i));
    const EventStream y = simulate(design.target, u);
    const EventStream yhat = run_mechanism(design, u, derive_seed(seed, 2 * i + 1));
    const Mat err = y.samples.bottomRows(kept) - yhat.samples.middleRows(first, kept);
    est.per_trial.push_back(err.squaredNorm() / static_cast<double>(kept));
  }
  double sum = 0.0;
  for (double v : est.per_trial) sum += v;
  est.mean = sum / static_cast<double>(trials);
  if (trials > 1) {
    double ss = 0.0;
    for (double v : est.per_trial) ss += (v - est.mean) * (v - est.mean);
    est.stderr_mean = std::sqrt(ss / static_cast<double>(trials - 1) /
                                static_cast<double>(trials));
  }
  return est;
}

Mat plot_data(const MechanismDesign& design, const SourceFn& source, std::size_t steps,
              std::uint64_t seed, std::size_t burn_in, std::size_t rows) {
  const EventStream u = source(steps, derive_seed(seed, 0));
  const EventStream y = simulate(design.target, u);
  const EventStream yhat = run_mechanism(design, u, derive_seed(seed, 1));
  const auto first = static_cast<Eigen::Index>(burn_in);
  const Eigen::Index count =
      std::max<Eigen::Index>(0, std::min<Eigen::Index>(static_cast<Eigen::Index>(rows),
                                                       y.steps() - first));
  const Eigen::Index p = y.channels();
  Mat plot(count, 1 + 2 * p);
  for (Eigen::Index r = 0; r < count; ++r) plot(r, 0) = static_cast<double>(first + r);
  plot.middleCols(1, p) = y.samples.middleRows(first, count);
  plot.rightCols(p) = yhat.samples.middleRows(first, count);
  return plot;
}

ExperimentReport compare_mechanisms(const ExperimentSpec& spec) {
  spec.privacy.validate(spec.f.cols());
  ExperimentReport report;
  report.zfe_diag_bound = zfe_mse_diag_bound(spec.f, spec.privacy, spec.zfe.grid_n);
  report.nuclear_bound = zfe_general_lower_bound(spec.f, spec.privacy, spec.zfe.grid_n);
  if (spec.mechanisms.empty()) return report;
  if (!spec.source) throw Error(ErrorCode::kConfigError, "experiment has no input source");

  for (MechanismKind kind : spec.mechanisms) {
    MechanismResult res;
    res.kind = kind;
    const auto t0 = std::chrono::steady_clock::now();
    const bool needs_spectrum = kind == MechanismKind::kWienerSmoother ||
                                kind == MechanismKind::kWienerCausal ||
                                kind == MechanismKind::kDecisionFeedback;
    if (needs_spectrum && !spec.spectrum) {
      throw Error(ErrorCode::kConfigError, to_string(kind) + " needs an input spectrum");
    }
    const Vec mean = spec.mean.size() == spec.f.cols() ? spec.mean : Vec::Zero(spec.f.cols());
    switch (kind) {
      case MechanismKind::kOutputPerturbation:
        res.design = output_perturbation(spec.f, spec.privacy, spec.exact_output_sensitivity);
        break;
      case MechanismKind::kZeroForcing:
        res.design = design_zfe(spec.f, spec.privacy, spec.zfe);
        break;
      case MechanismKind::kWienerSmoother:
        res.design = assemble_lms(spec.f, *spec.spectrum, mean, spec.privacy,
                                  LmsMode::kSmoother, spec.lms);
        break;
      case MechanismKind::kWienerCausal:
        res.design = assemble_lms(spec.f, *spec.spectrum, mean, spec.privacy,
                                  LmsMode::kCausal, spec.lms);
        break;
      case MechanismKind::kDecisionFeedback:
        res.design = assemble_df(spec.f, *spec.spectrum, mean, spec.privacy, spec.domain,
                                 spec.lookahead, spec.lms);
        break;
    }
    res.design_seconds = seconds_since(t0);
    res.theory_mse = res.design.theory_mse;
    res.noise_sigma = res.design.noise_sigma;

    const auto t1 = std::chrono::steady_clock::now();
    const MseEstimate est =
        empirical_mse(res.design, spec.source, spec.trials, spec.steps, spec.seed);
    res.empirical_mse = est.mean;
    res.stderr_mse = est.stderr_mean;
    res.burn_in = est.burn_in;
    res.simulate_seconds = seconds_since(t1);

    res.plot = plot_data(res.design, spec.source, spec.steps, spec.seed, est.burn_in,
                         spec.plot_steps);
    report.results.push_back(std::move(res));
  }
  return report;
}

std::string plot_csv(const MechanismResult& result) {
  std::ostringstream os;
  const Eigen::Index p = (result.plot.cols() - 1) / 2;
  os << "t";
  for (Eigen::Index i = 1; i <= p; ++i) os << ",y_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",yhat_" << i;
  os << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < result.plot.rows(); ++r) {
    os << static_cast<long long>(result.plot(r, 0));
    for (Eigen::Index c = 1; c < result.plot.cols(); ++c) os << ',' << result.plot(r, c);
    os << '\n';
  }
  return os.str();
}

}  // namespace dpfilter
