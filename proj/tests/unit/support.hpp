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

#ifndef LCV_TESTS_SUPPORT_HPP_
#define LCV_TESTS_SUPPORT_HPP_

// Test-only oracles, independent of the library code paths they check.

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace lcv::testing {

inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Trace of the central-difference Hessian.
inline double fd_laplacian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x, double h = 1e-4) {
  double acc = 0.0;
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    acc += (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
  }
  return acc;
}

inline double rel_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

inline double rel_error(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline Eigen::VectorXd uniform_point(std::mt19937_64& rng, int dim, double lo,
                                     double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x[i] = u(rng);
  return x;
}

// Composite Simpson of g on [lo, hi] with `intervals` (even) intervals, in
// long double.
inline long double simpson_ld(const std::function<long double(long double)>& g,
                              long double lo, long double hi, long intervals) {
  const long double h = (hi - lo) / intervals;
  long double acc = g(lo) + g(hi);
  for (long i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0L : 2.0L) * g(lo + i * h);
  return acc * h / 3.0L;
}

}  // namespace lcv::testing

#endif  // LCV_TESTS_SUPPORT_HPP_
