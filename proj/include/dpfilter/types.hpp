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

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dpfilter {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Multi-channel discrete-time sequence. Row t of `samples` is time step t.
struct EventStream {
  std::vector<std::string> names;
  Mat samples;
  std::string dt_label;

  EventStream() = default;
  explicit EventStream(Mat data, std::vector<std::string> channel_names = {});

  Eigen::Index steps() const { return samples.rows(); }
  Eigen::Index channels() const { return samples.cols(); }

  // Default channel names "u1", "u2", ... when none were given.
  static std::vector<std::string> default_names(Eigen::Index channels,
                                                const std::string& prefix);
};

}  // namespace dpfilter
