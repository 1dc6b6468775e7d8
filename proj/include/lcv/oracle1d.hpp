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

#ifndef LCV_ORACLE1D_HPP_
#define LCV_ORACLE1D_HPP_

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lcv/bases.hpp"
#include "lcv/potentials.hpp"

namespace lcv {

using ScalarFunction = std::function<double(double)>;

// Equally spaced odd number of nodes on [-a, a] with composite Simpson
// weights.
struct QuadratureGrid {
  double a = 5.0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.size(); }
  double step() const { return 2.0 * a / static_cast<double>(nodes.size() - 1); }
  // Same interval with the interval count doubled.
  QuadratureGrid refined() const;
};

// Throws ParameterError unless a > 0 and nodes is odd and >= 3.
QuadratureGrid make_grid(double a, Eigen::Index nodes);

struct QuadratureValue {
  double value = 0.0;
  Eigen::Index nodes = 0;   // node count of the accepted grid
  bool converged = false;   // false: refinement cap reached first
};

inline constexpr Eigen::Index kMaxQuadratureNodes = (Eigen::Index{1} << 20) + 1;

// Composite Simpson on the given grid values.
double simpson(const QuadratureGrid& grid, const Eigen::VectorXd& values);

// Composite Simpson, doubling the interval count from `grid` until two
// successive values agree to 1e-10 relative (absolute near zero) or the cap of
// 2^20 + 1 nodes is reached.
QuadratureValue integrate(const QuadratureGrid& grid, const ScalarFunction& integrand);

// Normalised density of `potential` on the grid nodes. With a known
// log-normaliser this is the exact density (so that `mass` < 1 measures the
// truncation); otherwise exp(-U) is normalised over [-a, a] in the log domain.
struct GridDensity {
  Eigen::VectorXd pi;
  double mass = 0.0;
  bool exact = false;
};
GridDensity density_on_grid(const Potential& potential, const QuadratureGrid& grid);

// Density pi(x) at an arbitrary point under the same normalisation rule.
ScalarFunction density_function(const Potential& potential, double a);

// pi(f) ~ int_{-a}^{a} f pi, refined by integrate().
double pi_expectation(const Potential& potential, const QuadratureGrid& grid,
                      const ScalarFunction& f);

// Derivative of the Poisson solution,
//   f^'(x) = -(1/pi(x)) int_{-a}^{x} pi(t) (f(t) - pi(f)) dt,
// tabulated on the grid nodes (cumulative trapezoid with an end correction,
// fourth order in the step) and linearly
// interpolated in between. Nodes where pi <= 1e-300 are masked to 0.
class PoissonDerivative {
 public:
  PoissonDerivative(Eigen::VectorXd nodes, Eigen::VectorXd values,
                    std::vector<bool> valid, double pi_f);
  double operator()(double x) const;
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& values() const { return values_; }
  bool valid(Eigen::Index i) const { return valid_[static_cast<std::size_t>(i)]; }
  double pi_f() const { return pi_f_; }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd values_;
  std::vector<bool> valid_;
  double pi_f_;
};

PoissonDerivative poisson_derivative(const Potential& potential,
                                     const QuadratureGrid& grid,
                                     const ScalarFunction& f);

// Langevin asymptotic variance 2 int (f^')^2 pi on the grid.
double sigma2_inf(const Potential& potential, const QuadratureGrid& grid,
                  const ScalarFunction& f);

// H = pi(psi' psi'^T), b = pi(psi f~), H_zv = pi(L psi L psi^T),
// b_zv = pi(f~ L psi) on the grid.
struct ExactMoments {
  Eigen::MatrixXd h;
  Eigen::VectorXd b;
  Eigen::MatrixXd h_zv;
  Eigen::VectorXd b_zv;
  double pi_f = 0.0;
};
ExactMoments exact_moments(const Potential& potential, const QuadratureGrid& grid,
                           const ControlBasis& basis, const ScalarFunction& f);

struct ExactTheta {
  Eigen::VectorXd theta_star;   // H^+ b
  Eigen::VectorXd theta_zv;     // -H_zv^+ b_zv
  bool rank_deficient = false;  // either matrix lost rank in the pseudoinverse
};
ExactTheta exact_theta(const ExactMoments& moments);
ExactTheta exact_theta(const Potential& potential, const QuadratureGrid& grid,
                       const ControlBasis& basis, const ScalarFunction& f);

// sigma2(f + L g_theta) = 2 theta^T H theta - 4 <theta, b> + sigma2(f).
double sigma2_with_cv(double sigma2_f, const Eigen::MatrixXd& h,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& theta);

struct OracleReport {
  double a = 0.0;
  double mass = 0.0;
  double pi_f = 0.0;
  double sigma2_f = 0.0;
  Eigen::MatrixXd h;
  Eigen::VectorXd b;
  Eigen::MatrixXd h_zv;
  Eigen::VectorXd b_zv;
  Eigen::VectorXd theta_star;
  Eigen::VectorXd theta_zv;
  double sigma2_cv = 0.0;
  double sigma2_zv = 0.0;
  Eigen::Index nodes = 0;
  bool converged = false;
  bool rank_deficient = false;
};

// Everything above at boundary a, evaluated on a grid refined until sigma2_f
// and both coefficient vectors are stable to `rel_tol`.
OracleReport oracle_report(const Potential& potential, const ControlBasis& basis,
                           const ScalarFunction& f, double a,
                           double rel_tol = 1e-9);

std::vector<OracleReport> truncation_sweep(const Potential& potential,
                                           const ControlBasis& basis,
                                           const ScalarFunction& f,
                                           const std::vector<double>& boundaries);

// Physicists' Gauss-Hermite rule (weight exp(-t^2)) by Golub-Welsch.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussHermiteRule gauss_hermite(int count);

// R_gamma f(x) = E f(x - gamma U'(x) + sqrt(2 gamma) Z) for the ULA kernel,
// by Gauss-Hermite quadrature with `hermite_nodes` nodes.
double ula_pullback(const Potential& potential, int hermite_nodes, double gamma,
                    const ScalarFunction& f, double x);

}  // namespace lcv

#endif  // LCV_ORACLE1D_HPP_
