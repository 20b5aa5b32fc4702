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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpfilter/lms.hpp"
#include "dpfilter/mechanism.hpp"
#include "dpfilter/zfe.hpp"

namespace dpfilter {

// Building-level forecast y_t = sum_i a_i y_{t-i} + b0 u_t + b1 u_{t-2}.
struct ForecastModel {
  Vec a;   // 4 autoregressive coefficients
  Vec b0;  // one weight per zone
  Vec b1;
};

// Moving average of the last 20 samples, one step delayed.
RationalFilter occupancy_f1();
// Length-20 sampled Gaussian, BT = 0.5 at 10 samples per symbol, unit sum.
RationalFilter occupancy_f2();
// Per-zone transfer functions of the forecast model.
std::vector<RationalFilter> occupancy_f3(const ForecastModel& model);

// 3 x m bank: zones 1-5 averaged by f1, zones 5-12 smoothed by f2, and the
// forecast over all zones. Throws MissingForecastModel without a model.
TransferMatrix occupancy_filter_bank(const std::optional<ForecastModel>& model,
                                     Eigen::Index m = 15);

// Diagonal bank of (1 - a) / (1 - a z^-1) smoothers, unit DC gain.
TransferMatrix exponential_smoothing_bank(Eigen::Index m, double a = 0.75);

struct OccupancySourceConfig {
  Vec rates = Vec::Constant(15, 1.0);  // mean events per step, per zone
  int period = 480;                     // steps per day
  double amplitude = 0.8;               // relative swing of the daily cycle
  double phase = 0.0;                   // step at which the cycle peaks
  // Shared two-state modulator scaling every rate by 1 +- depth.
  bool modulated = false;
  double depth = 0.5;
  double switch_prob = 0.02;
  std::string dt_label = "3 min";
};

// Poisson counts with a cosine daily profile.
EventStream synthetic_occupancy_source(const OccupancySourceConfig& config,
                                       std::size_t steps, std::uint64_t seed);

// Least-squares ARX fit of the forecast model: the target at time t is the
// average building-wide count over steps t + lead_lo .. t + lead_hi - 1.
ForecastModel fit_forecast_model(const EventStream& data, int lead_lo = 20,
                                 int lead_hi = 30);

// Toolkit-fitted coefficients, see default_forecast_fit_source().
ForecastModel default_forecast_model();
// The synthetic record the default model was fitted on.
EventStream default_forecast_fit_source();

using SourceFn = std::function<EventStream(std::size_t steps, std::uint64_t seed)>;

// Released-side estimate yhat for one run. DF returns the aligned estimate.
EventStream run_mechanism(const MechanismDesign& design, const EventStream& input,
                          std::uint64_t seed);

// 10x the longest effective impulse-response length in the mechanism.
std::size_t burn_in_steps(const MechanismDesign& design);

struct MseEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::vector<double> per_trial;
  std::size_t burn_in = 0;
};

// Trial i draws its input from derive_seed(seed, 2i) and its noise from
// derive_seed(seed, 2i + 1). Throws InsufficientSteps when steps <= burn-in.
MseEstimate empirical_mse(const MechanismDesign& design, const SourceFn& source,
                          std::size_t trials, std::size_t steps,
                          std::uint64_t seed,
                          std::optional<std::size_t> burn_in = std::nullopt);

// Columns t, y_1..y_p, yhat_1..yhat_p for up to `rows` steps after burn-in,
// replaying trial 0 of empirical_mse with the same seed.
Mat plot_data(const MechanismDesign& design, const SourceFn& source, std::size_t steps,
              std::uint64_t seed, std::size_t burn_in, std::size_t rows);

struct ExperimentSpec {
  TransferMatrix f;
  PrivacySpec privacy;
  std::vector<MechanismKind> mechanisms;
  SourceFn source;
  std::optional<SpectrumGrid> spectrum;  // needed by LMS and DF
  Vec mean;
  std::size_t trials = 10;
  std::size_t steps = 20000;
  std::uint64_t seed = 1;
  std::size_t plot_steps = 480;
  ZfeOptions zfe;
  LmsOptions lms;
  DecisionDomain domain = DecisionDomain::kReals;
  int lookahead = 2;
  bool exact_output_sensitivity = false;
};

struct MechanismResult {
  MechanismKind kind = MechanismKind::kZeroForcing;
  std::optional<double> theory_mse;
  double empirical_mse = 0.0;
  double stderr_mse = 0.0;
  double design_seconds = 0.0;
  double simulate_seconds = 0.0;
  double noise_sigma = 0.0;
  std::size_t burn_in = 0;
  // Columns t, y_1..y_p, yhat_1..yhat_p from the first trial.
  Mat plot;
  MechanismDesign design;
};

struct ExperimentReport {
  double zfe_diag_bound = 0.0;
  double nuclear_bound = 0.0;
  std::vector<MechanismResult> results;
};

ExperimentReport compare_mechanisms(const ExperimentSpec& spec);

// Header and rows of the plot data as CSV text.
std::string plot_csv(const MechanismResult& result);

}  // namespace dpfilter
