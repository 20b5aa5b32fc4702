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
#include <vector>

#include "dpfilter/lti.hpp"

namespace dpfilter {

// Finite-state chain with column-stochastic transitions,
// transition(i, j) = P(x_{t+1} = i | x_t = j). Each selector turns the
// indicator of one state into an event channel.
struct MarkovSource {
  Mat transition;
  std::vector<int> selectors;

  Eigen::Index states() const { return transition.rows(); }
  Eigen::Index channels() const { return static_cast<Eigen::Index>(selectors.size()); }
  // Throws ConfigError on a malformed matrix or selector.
  void validate() const;
};

// Four-state server: idle (0) -> s1 (1) with probability alpha, s1 -> busy
// (2), busy -> s2 (3) with probability beta, s2 -> idle. Channels are the
// indicators of s1 and s2.
MarkovSource server_example(double alpha, double beta);

// Irreducible and aperiodic: a single eigenvalue on the unit circle.
bool is_ergodic(const MarkovSource& src);

Vec stationary_distribution(const MarkovSource& src);
Vec stationary_distribution_power(const MarkovSource& src, double tol = 1e-14,
                                  int max_iter = 1000000);

struct ChainSpectrum {
  SpectrumGrid centered;  // spectrum of the selected indicators minus their mean
  Vec mean;               // stationary probabilities of the selected states
};

ChainSpectrum chain_spectrum(const MarkovSource& src, std::size_t n);

// Stationary start, indicator channels named after the selected states.
EventStream sample_chain(const MarkovSource& src, std::size_t steps,
                         std::uint64_t seed);

// Demonstration target for the server example: two length-8 moving
// averages (toolkit choice).
TransferMatrix markov_demo_filter();

}  // namespace dpfilter
