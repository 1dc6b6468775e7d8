// Copyright 2026 The langevin-cv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LCV_VARIANCE_HPP_
#define LCV_VARIANCE_HPP_

#include <cstdint>

#include <Eigen/Dense>

namespace lcv {

// omega(k) = (1/n) sum_{s=0}^{n-1-k} (h_s - mean)(h_{s+k} - mean) for
// k = 0..max_lag, with the full-series mean and divisor n at every lag.
// Throws ParameterError unless max_lag < n.
Eigen::VectorXd autocovariance(const Eigen::Ref<const Eigen::VectorXd>& series,
                               Eigen::Index max_lag);

// Tukey-Hanning lag window w(k) = 1/2 + 1/2 cos(pi k / b), b = floor(sqrt(n)).
double tukey_hanning_weight(Eigen::Index k, Eigen::Index bandwidth);

struct SpectralEstimate {
  double sigma2 = 0.0;           // raw, not clamped
  std::uint64_t n = 0;
  Eigen::Index max_lag = 0;      // floor(sqrt(n)) - 1
  Eigen::VectorXd autocov;       // omega(0..max_lag)
  bool negative = false;         // sigma2 < 0 (sampling noise)
};

// sigma2 = omega(0) + 2 sum_{k=1}^{b-1} w(k) omega(k), b = floor(sqrt(n)).
// Long series get their autocovariances from a zero-padded FFT instead of the
// direct sum; the two agree to rounding. Throws ParameterError for n < 4.
SpectralEstimate spectral_variance(const Eigen::Ref<const Eigen::VectorXd>& series);

}  // namespace lcv

#endif  // LCV_VARIANCE_HPP_
