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

#include "lcv/variance.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "lcv/errors.hpp"

namespace lcv {

namespace {

// Series minus its mean, with the mean taken relative to the first value so
// that a constant series centres to exact zeros.
Eigen::VectorXd centre(const Eigen::Ref<const Eigen::VectorXd>& series) {
  const double origin = series[0];
  const Eigen::ArrayXd shifted = series.array() - origin;
  return (shifted - shifted.mean()).matrix();
}

// Smallest even 2^a 3^b 5^c >= n.
Eigen::Index smooth_size(Eigen::Index n) {
  for (Eigen::Index m = std::max<Eigen::Index>(n, 2);; ++m) {
    if (m % 2) continue;
    Eigen::Index r = m;
    for (Eigen::Index p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

Eigen::VectorXd autocov_fft(const Eigen::VectorXd& centered, Eigen::Index max_lag) {
  const Eigen::Index n = centered.size();
  // Padding by max_lag + 1 keeps the circular correlation free of wrap-around
  // for every lag we read back.
  const Eigen::Index m = smooth_size(n + max_lag + 1);
  std::vector<double> padded(static_cast<std::size_t>(m), 0.0);
  std::copy(centered.data(), centered.data() + n, padded.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  for (auto& c : spectrum) c = std::norm(c);
  std::vector<double> corr;
  fft.inv(corr, spectrum);
  Eigen::VectorXd out(max_lag + 1);
  for (Eigen::Index k = 0; k <= max_lag; ++k) {
    out[k] = corr[static_cast<std::size_t>(k)] / static_cast<double>(n);
  }
  return out;
}

// Below this many multiply-adds the direct sum is cheaper than the FFT.
constexpr double kDirectWork = 2e7;

}  // namespace

Eigen::VectorXd autocovariance(const Eigen::Ref<const Eigen::VectorXd>& series,
                               Eigen::Index max_lag) {
  const Eigen::Index n = series.size();
  if (max_lag < 0 || max_lag >= n) {
    throw ParameterError("autocovariance: max_lag " + std::to_string(max_lag) +
                         " must be below the series length " +
                         std::to_string(n));
  }
  const Eigen::VectorXd centered = centre(series);
  Eigen::VectorXd out(max_lag + 1);
  for (Eigen::Index k = 0; k <= max_lag; ++k) {
    out[k] = centered.head(n - k).dot(centered.tail(n - k)) /
             static_cast<double>(n);
  }
  return out;
}

double tukey_hanning_weight(Eigen::Index k, Eigen::Index bandwidth) {
  return 0.5 + 0.5 * std::cos(std::numbers::pi * static_cast<double>(k) /
                              static_cast<double>(bandwidth));
}

SpectralEstimate spectral_variance(
    const Eigen::Ref<const Eigen::VectorXd>& series) {
  const Eigen::Index n = series.size();
  if (n < 4) throw ParameterError("spectral_variance needs at least 4 values");
  auto bandwidth =
      static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(n))));
  while ((bandwidth + 1) * (bandwidth + 1) <= n) ++bandwidth;
  while (bandwidth * bandwidth > n) --bandwidth;
  SpectralEstimate out;
  out.n = static_cast<std::uint64_t>(n);
  out.max_lag = bandwidth - 1;
  const double work = static_cast<double>(n) * static_cast<double>(bandwidth);
  out.autocov = work <= kDirectWork ? autocovariance(series, out.max_lag)
                                    : autocov_fft(centre(series), out.max_lag);
  double acc = out.autocov[0];
  for (Eigen::Index k = 1; k <= out.max_lag; ++k) {
    acc += 2.0 * tukey_hanning_weight(k, bandwidth) * out.autocov[k];
  }
  out.sigma2 = acc;
  out.negative = acc < 0.0;
  return out;
}

}  // namespace lcv
