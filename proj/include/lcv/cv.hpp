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

#ifndef LCV_CV_HPP_
#define LCV_CV_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lcv/bases.hpp"
#include "lcv/potentials.hpp"
#include "lcv/samplers.hpp"

namespace lcv {

using TestFunction = std::function<double(const Eigen::VectorXd&)>;

enum class FitMethod { CV, ZV };

std::string to_string(FitMethod m);

// Sample moments feeding a quadratic fit.
//   CV: h = (1/m) sum grad psi grad psi^T,  b = (1/m) sum psi f~
//   ZV: h = (1/m) sum L psi L psi^T,        b = (1/m) sum L psi f~
// with f~ = f - mean_f and mean_f the same-sample average of f.
struct Moments {
  Eigen::MatrixXd h;
  Eigen::VectorXd b;
  double mean_f = 0.0;
  std::uint64_t m = 0;
  FitMethod method = FitMethod::CV;
};

struct CvFit {
  Eigen::VectorXd theta;
  Eigen::MatrixXd h_matrix;
  Eigen::VectorXd b_vector;
  FitMethod method = FitMethod::CV;
  double sample_mean_f = 0.0;
  std::uint64_t m = 0;
};

// grad U at every sample of the chain (length x dim).
SampleMatrix gradient_table(const ChainOutput& chain, const Potential& potential);

// Moments of both criteria for several test functions in one pass over the
// chain. Column k of b_cv / b_zv belongs to fs[k]. `grads` is the chain's
// gradient_table. Sums are Kahan-compensated.
struct BatchMoments {
  Eigen::MatrixXd h_cv;
  Eigen::MatrixXd h_zv;
  Eigen::MatrixXd b_cv;
  Eigen::MatrixXd b_zv;
  Eigen::VectorXd mean_f;
  std::uint64_t m = 0;

  Moments cv(std::size_t k) const;
  Moments zv(std::size_t k) const;
};

BatchMoments batch_moments(const ChainOutput& chain, const SampleMatrix& grads,
                           const ControlBasis& basis,
                           const std::vector<TestFunction>& fs);

Moments cv_moments(const ChainOutput& chain, const Potential& potential,
                   const ControlBasis& basis, const TestFunction& f);
Moments zv_moments(const ChainOutput& chain, const Potential& potential,
                   const ControlBasis& basis, const TestFunction& f);

// SVD pseudoinverse; singular values below p * eps * sigma_max are dropped.
// `rank`, when given, receives the number of retained singular values.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& a, Eigen::Index* rank = nullptr);

// CV: theta = h^+ b. ZV: theta = -h^+ b.
CvFit fit(const Moments& moments, FitMethod method);
inline CvFit fit(const Moments& moments) { return fit(moments, moments.method); }

// h(X_k) = f(X_k) + L g_theta(X_k) over the post-burn-in samples.
Eigen::VectorXd corrected_series(const ChainOutput& chain,
                                 const Potential& potential,
                                 const ControlBasis& basis,
                                 const Eigen::VectorXd& theta,
                                 const TestFunction& f);

// Columns k = f_k + L g_{thetas.col(k)} for every sample; `grads` is the
// chain's gradient_table.
Eigen::MatrixXd corrected_series_batch(const ChainOutput& chain,
                                       const SampleMatrix& grads,
                                       const ControlBasis& basis,
                                       const Eigen::MatrixXd& thetas,
                                       const std::vector<TestFunction>& fs);

Eigen::VectorXd plain_series(const ChainOutput& chain, const TestFunction& f);

// (1/n) sum f(X_k) + L g_theta(X_k).
double cv_estimate(const ChainOutput& chain, const Potential& potential,
                   const ControlBasis& basis, const CvFit& fit,
                   const TestFunction& f);

// (1/n) sum f(X_k).
double plain_estimate(const ChainOutput& chain, const TestFunction& f);

// Compensated arithmetic mean.
double compensated_mean(const Eigen::Ref<const Eigen::VectorXd>& values);

}  // namespace lcv

#endif  // LCV_CV_HPP_
