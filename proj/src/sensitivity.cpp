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

#include "dpfilter/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpfilter/error.hpp"

namespace dpfilter {

namespace {

void require_k(const Vec& k, Eigen::Index inputs) {
  if (k.size() != inputs) {
    throw Error(ErrorCode::kDimensionMismatch,
                "k has " + std::to_string(k.size()) + " entries, system has " +
                    std::to_string(inputs) + " inputs");
  }
}

}  // namespace

double simo_sensitivity(const TransferMatrix& g, double k1) {
  if (g.cols() != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "SIMO sensitivity needs one input");
  }
  return std::abs(k1) * h2_norm(g);
}

double diagonal_sensitivity(const TransferMatrix& g, const Vec& k) {
  if (!g.is_diagonal()) {
    throw Error(ErrorCode::kNotDiagonal, "system is not square diagonal");
  }
  require_k(k, g.cols());
  double energy = 0.0;
  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    if (!g(i, i).is_stable()) {
      throw Error(ErrorCode::kUnstableSystem, "unstable diagonal entry");
    }
    energy += std::pow(k[i] * h2_norm(g(i, i)), 2);
  }
  return std::sqrt(energy);
}

SensitivityReport mimo_bounds(const TransferMatrix& g, const Vec& k) {
  require_k(k, g.cols());
  SensitivityReport report;
  double lower = 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const double col = h2_norm(g.column(j));
    lower += k[j] * k[j] * col * col;
    total += col * col;
  }
  report.lower = std::sqrt(lower);
  report.upper = k.norm() * std::sqrt(total);
  return report;
}

SensitivityReport mimo_bounds(const StateSpace& g, const Vec& k) {
  require_k(k, g.inputs());
  if (!g.is_stable()) {
    throw Error(ErrorCode::kUnstableSystem, "state matrix spectral radius >= 1");
  }
  const Mat p = g.states() > 0 ? observability_gramian(g) : Mat(0, 0);
  double lower = 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < g.inputs(); ++j) {
    double col = g.D.col(j).squaredNorm();
    if (g.states() > 0) col += g.B.col(j).dot(p * g.B.col(j));
    lower += k[j] * k[j] * col;
    total += col;
  }
  SensitivityReport report;
  report.lower = std::sqrt(std::max(lower, 0.0));
  report.upper = k.norm() * std::sqrt(std::max(total, 0.0));
  return report;
}

SensitivityReport mimo_exact(const StateSpace& ss, const Vec& k, double tol,
                             int max_horizon) {
  SensitivityReport report = mimo_bounds(ss, k);
  const Eigen::Index m = ss.inputs();
  const Eigen::Index n = ss.states();
  // best(i, j): running max over tau >= 0 of |S_ij^tau|. The negative-lag
  // values are S_ji^{|tau|}, so the two-sided supremum is max(best, best^T).
  Mat best = Mat::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      best(i, j) = std::abs(ss.D.col(i).dot(ss.D.col(j)));
    }
  }
  int horizon = 0;
  if (n > 0) {
    const Mat p = observability_gramian(ss);
    const Mat ctd = ss.C.transpose() * ss.D;  // n x m
    const Mat pb = p * ss.B;                  // n x m
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        best(i, j) = std::abs(ss.D.col(i).dot(ss.D.col(j)) +
                              ss.B.col(i).dot(pb.col(j)));
      }
    }
    // Tail constants: |S_ij^tau| <= c_ij ||A^(tau-1)|| for tau >= 1.
    const double a_norm = ss.A.norm();
    Mat c(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        c(i, j) = ss.B.col(i).norm() *
                  (ctd.col(j).norm() + a_norm * pb.col(j).norm());
      }
    }
    // Norms of A^s; the first s0 with ||A^s0|| < 1 lets a window of s0
    // consecutive norms bound every later power.
    std::vector<double> power_norms{std::sqrt(static_cast<double>(n))};
    Mat power = Mat::Identity(n, n);
    int s0 = 0;
    auto extend_powers = [&](std::size_t upto) {
      while (power_norms.size() <= upto) {
        power = ss.A * power;
        power_norms.push_back(power.norm());
        if (s0 == 0 && power_norms.back() < 1.0) {
          s0 = static_cast<int>(power_norms.size()) - 1;
        }
        if (!std::isfinite(power_norms.back())) {
          throw Error(ErrorCode::kHorizonExceeded, "powers of A diverge");
        }
      }
    };
    while (s0 == 0) {
      if (static_cast<int>(power_norms.size()) > max_horizon) {
        throw Error(ErrorCode::kHorizonExceeded,
                    "no power of A has norm below one within the horizon");
      }
      extend_powers(power_norms.size());
    }
    Mat x_prev = ss.B;        // A^(tau-1) B
    Mat x_cur = ss.A * ss.B;  // A^tau B
    for (int tau = 1;; ++tau) {
      if (tau > max_horizon) {
        throw Error(ErrorCode::kHorizonExceeded,
                    "tail bound not reached within " + std::to_string(max_horizon) +
                        " lags");
      }
      const Mat s = x_prev.transpose() * ctd + x_cur.transpose() * pb;
      best = best.cwiseMax(s.cwiseAbs());
      // Bound for every lag beyond tau.
      extend_powers(static_cast<std::size_t>(tau + s0));
      double window = 0.0;
      for (int u = 0; u < s0; ++u) {
        window = std::max(window, power_norms[static_cast<std::size_t>(tau + u)]);
      }
      bool done = true;
      for (Eigen::Index i = 0; i < m && done; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
          if (i == j) continue;
          if (c(i, j) * window > std::max(best(i, j), tol)) {
            done = false;
            break;
          }
        }
      }
      if (done || m == 1) {
        horizon = tau;
        break;
      }
      x_prev = x_cur;
      x_cur = ss.A * x_cur;
    }
  }
  double energy = report.lower * report.lower;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      energy += k[i] * k[j] * std::max(best(i, j), best(j, i));
    }
  }
  report.exact = std::sqrt(energy);
  report.horizon_used = horizon;
  return report;
}

double brute_force_sensitivity(const TransferMatrix& g, const Vec& k,
                               int horizon) {
  const Eigen::Index m = g.cols();
  const Eigen::Index p = g.rows();
  require_k(k, m);
  if (m > 3 || horizon > 10 || horizon < 0) {
    throw Error(ErrorCode::kOracleTooLarge,
                "brute-force oracle is limited to m <= 3 and horizon <= 10");
  }
  std::size_t len = 1;
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      if (!g(r, c).is_fir()) {
        throw Error(ErrorCode::kOracleTooLarge, "brute-force oracle needs FIR entries");
      }
      len = std::max(len, g(r, c).numerator().size());
    }
  }
  if (static_cast<int>(len) - 1 > horizon) {
    throw Error(ErrorCode::kOracleTooLarge, "filter support exceeds the horizon");
  }
  const std::size_t out_len = static_cast<std::size_t>(horizon) + len;
  const int times = horizon + 1;
  int combos = 1;
  for (Eigen::Index i = 0; i < m; ++i) combos *= times;
  double best = 0.0;
  Mat y(p, static_cast<Eigen::Index>(out_len));
  for (int combo = 0; combo < combos; ++combo) {
    std::vector<int> t(static_cast<std::size_t>(m));
    int rest = combo;
    for (Eigen::Index i = 0; i < m; ++i) {
      t[static_cast<std::size_t>(i)] = rest % times;
      rest /= times;
    }
    for (int signs = 0; signs < (1 << m); ++signs) {
      y.setZero();
      for (Eigen::Index i = 0; i < m; ++i) {
        const double alpha = ((signs >> i) & 1) ? -k[i] : k[i];
        for (Eigen::Index r = 0; r < p; ++r) {
          const std::vector<double>& h = g(r, i).numerator();
          for (std::size_t s = 0; s < h.size(); ++s) {
            y(r, t[static_cast<std::size_t>(i)] + static_cast<Eigen::Index>(s)) +=
                alpha * h[s];
          }
        }
      }
      best = std::max(best, y.norm());
    }
  }
  return best;
}

}  // namespace dpfilter
