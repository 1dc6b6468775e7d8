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

#ifndef LCV_POTENTIALS_HPP_
#define LCV_POTENTIALS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace lcv {

// Target density pi proportional to exp(-U) on R^dim, described by the
// potential energy U and its gradient. Additive constants in U are dropped;
// when the normalising constant of exp(-U) is known in closed form it is
// carried as `log_normalizer`, so that pi(x) = exp(-U(x) - log_normalizer).
//
// Immutable after construction; evaluation is safe from many threads.
class Potential {
 public:
  using EnergyFn = std::function<double(const Eigen::VectorXd&)>;
  using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  Potential(int dim, EnergyFn u, GradientFn grad_u, std::string label,
            std::optional<double> log_normalizer = std::nullopt);

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }
  const std::optional<double>& log_normalizer() const { return log_normalizer_; }

  // Throws ShapeError when x.size() != dim().
  double u(const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad_u(const Eigen::VectorXd& x) const;

 private:
  void check(const Eigen::VectorXd& x) const;

  int dim_;
  EnergyFn u_;
  GradientFn grad_u_;
  std::string label_;
  std::optional<double> log_normalizer_;
};

// Binary-response regression data set: rows of `design` are covariate
// vectors, `labels` holds 0/1 responses, and the prior on the coefficients is
// N(0, prior_variance * Id).
struct RegressionData {
  Eigen::MatrixXd design;
  Eigen::VectorXd labels;
  double prior_variance = 100.0;

  int rows() const { return static_cast<int>(design.rows()); }
  int dim() const { return static_cast<int>(design.cols()); }

  // Throws DataError on empty design, NaN entries, non-binary labels or a
  // label/row count mismatch; ParameterError on a non-positive prior variance.
  void validate() const;
};

enum class LinkModel { logistic, probit };

// Equal-weight mixture of N(mean1, variance) and N(mean2, variance).
Potential mixture1d_potential(double mean1, double mean2, double variance);

// U(x) = x^T precision x / 2. Throws ParameterError unless `precision` is a
// dim x dim symmetric positive definite matrix.
Potential gaussian_potential(int dim, const Eigen::MatrixXd& precision);

// Bayesian logistic regression posterior with isotropic Gaussian prior.
Potential logistic_potential(RegressionData data);

// Bayesian probit regression posterior with isotropic Gaussian prior.
Potential probit_potential(RegressionData data);

namespace probit {

// Below this argument the Mills-ratio asymptotic series replaces erfc.
inline constexpr double kSeriesBranch = -8.0;

// ln Phi(t), with Phi the standard normal distribution function.
double log_cdf(double t);

// h'(t) = Phi'(t) / Phi(t).
double hazard(double t);

// Asymptotic series S(s) = sum_k (-1)^k (2k-1)!! s^{-2k}, truncated at its
// smallest term, for which Phi(-s) ~ phi(s) S(s) / s as s -> infinity.
double tail_series(double s);

}  // namespace probit

// Posterior mode by BFGS with Armijo backtracking (c = 1e-4, shrink 0.5). Returns x with ||grad U(x)|| <= tol; throws ConvergenceError
// carrying the last iterate once max_iter iterations are spent.
Eigen::VectorXd find_mode(const Potential& potential, Eigen::VectorXd x0,
                          double tol = 1e-8, int max_iter = 10000);

// Reads a comma-separated file with a mandatory header row. The label column
// becomes `labels`, the remaining columns the design matrix (in file order);
// with `intercept` a constant-one column is prepended. Errors name the
// 1-based data row.
RegressionData load_regression_csv(const std::filesystem::path& path,
                                   const std::string& label_column,
                                   bool intercept,
                                   double prior_variance = 100.0);

// Seeded synthetic data set: standard normal design rows and labels drawn
// from the model at synthetic_coefficients(dim).
RegressionData synthetic_regression(int rows, int dim, std::uint64_t seed,
                                    LinkModel model,
                                    double prior_variance = 100.0);

// Fixed "true" coefficient vector used by synthetic_regression.
Eigen::VectorXd synthetic_coefficients(int dim);

}  // namespace lcv

#endif  // LCV_POTENTIALS_HPP_
