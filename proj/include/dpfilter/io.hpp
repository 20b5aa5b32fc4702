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
#include <initializer_list>
#include <optional>
#include <string>

#include "json.hpp"

#include "dpfilter/lms.hpp"
#include "dpfilter/markov.hpp"
#include "dpfilter/mechanism.hpp"
#include "dpfilter/sensitivity.hpp"
#include "dpfilter/sim.hpp"

namespace dpfilter::io {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// Throws ConfigError naming the first key outside `allowed`.
void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& context);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
json read_json(const std::string& path);

// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

// CSV with a header row of channel names.
EventStream read_csv(const std::string& path);
std::string to_csv(const EventStream& stream);

json to_json(const Mat& m);
Mat mat_from_json(const json& j, const std::string& context);
json to_json(const Vec& v);
Vec vec_from_json(const json& j, const std::string& context);

json to_json(const RationalFilter& f);
RationalFilter filter_from_json(const json& j, const std::string& context);
json to_json(const TransferMatrix& tm);
TransferMatrix transfer_matrix_from_json(const json& j, const std::string& context);
json to_json(const MatrixFir& fir);
MatrixFir fir_from_json(const json& j, const std::string& context);

json to_json(const PrivacySpec& p);
PrivacySpec privacy_from_json(const json& j);

json to_json(const ForecastModel& m);
ForecastModel forecast_from_json(const json& j);

json to_json(const SensitivityReport& r);

json to_json(const MechanismDesign& d);
MechanismDesign design_from_json(const json& j);

json to_json(const AllocationProfile& p);

// Filter description: a builtin name ("occupancy_bank", "markov_demo",
// "aligned_delays", "smoothing"), an object {"builtin": name, ...parameters},
// {"path": file} or an inline transfer matrix.
TransferMatrix filter_from_spec(const json& spec,
                                const std::optional<ForecastModel>& forecast);

struct SpectrumSpec {
  SpectrumGrid centered;
  Vec mean;
};

// {"type": "autocovariance" | "rational" | "white" | "markov" | "server", ...}.
SpectrumSpec spectrum_from_spec(const json& spec, std::size_t n);

// {"type": "markov" | "server" | "occupancy" | "csv", ...}. A CSV source
// replays the same record in every trial, truncated to the requested steps.
SourceFn source_from_spec(const json& spec);
MarkovSource markov_from_spec(const json& spec);

json to_json(const ExperimentReport& r, bool timing);

}  // namespace dpfilter::io
