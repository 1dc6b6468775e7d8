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

#include "lcv/oracle1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "lcv/cv.hpp"
#include "lcv/errors.hpp"

namespace lcv {

namespace {

constexpr double kDensityFloor = 1e-300;

void require_1d(const Potential& potential) {
  if (potential.dim() != 1) {
    throw ShapeError("oracle1d needs a one-dimensional potential, got dim " +
                     std::to_string(potential.dim()));
  }
}

double eval_u(const Potential& potential, double x) {
  return potential.u(Eigen::VectorXd::Constant(1, x));
}

double eval_du(const Potential& potential, double x) {
  return potential.grad_u(Eigen::VectorXd::Constant(1, x))[0];
}

Eigen::VectorXd tabulate(const QuadratureGrid& grid, const ScalarFunction& g) {
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) out[i] = g(grid.nodes[i]);
  return out;
}

}  // namespace

QuadratureGrid make_grid(double a, Eigen::Index nodes) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw ParameterError("quadrature boundary must be positive");
  }
  if (nodes < 3 || nodes % 2 == 0) {
    throw ParameterError("quadrature node count must be odd and >= 3");
  }
  QuadratureGrid grid;
  grid.a = a;
  grid.nodes = Eigen::VectorXd::LinSpaced(nodes, -a, a);
  const double h = 2.0 * a / static_cast<double>(nodes - 1);
  grid.weights.resize(nodes);
  for (Eigen::Index i = 0; i < nodes; ++i) {
    grid.weights[i] = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  }
  grid.weights *= h / 3.0;
  return grid;
}

QuadratureGrid QuadratureGrid::refined() const {
  return make_grid(a, 2 * (size() - 1) + 1);
}

double simpson(const QuadratureGrid& grid, const Eigen::VectorXd& values) {
  if (values.size() != grid.size()) {
    throw ShapeError("simpson: value count differs from grid size");
  }
  return grid.weights.dot(values);
}

QuadratureValue integrate(const QuadratureGrid& grid,
                          const ScalarFunction& integrand) {
  QuadratureGrid current = grid.size() >= 33 ? grid : make_grid(grid.a, 33);
  Eigen::VectorXd values = tabulate(current, integrand);
  if (!values.allFinite()) {
    throw NumericError("integrate: integrand is not finite on the grid");
  }
  double previous = simpson(current, values);
  while (current.size() < kMaxQuadratureNodes) {
    current = current.refined();
    values = tabulate(current, integrand);
    if (!values.allFinite()) {
      throw NumericError("integrate: integrand is not finite on the grid");
    }
    const double value = simpson(current, values);
    const double scale = std::max(std::abs(value), simpson(current, values.cwiseAbs()));
    if (std::abs(value - previous) <= 1e-10 * scale) {
      return {value, current.size(), true};
    }
    previous = value;
  }
  return {previous, current.size(), false};
}

GridDensity density_on_grid(const Potential& potential,
                            const QuadratureGrid& grid) {
  require_1d(potential);
  const Eigen::VectorXd u =
      tabulate(grid, [&](double x) { return eval_u(potential, x); });
  GridDensity out;
  if (potential.log_normalizer()) {
    out.exact = true;
    out.pi = (-(u.array() + *potential.log_normalizer())).exp().matrix();
    out.mass = simpson(grid, out.pi);
  } else {
    const double u_min = u.minCoeff();
    out.pi = (-(u.array() - u_min)).exp().matrix();
    const double z = simpson(grid, out.pi);
    if (!(z > 0.0) || !std::isfinite(z)) {
      throw NumericError("density normalisation failed on [-a, a]");
    }
    out.pi /= z;
    out.mass = 1.0;
  }
  return out;
}

ScalarFunction density_function(const Potential& potential, double a) {
  require_1d(potential);
  if (potential.log_normalizer()) {
    const double log_z = *potential.log_normalizer();
    return [potential, log_z](double x) {
      return std::exp(-eval_u(potential, x) - log_z);
    };
  }
  const QuadratureGrid coarse = make_grid(a, 4097);
  double u_min = eval_u(potential, coarse.nodes[0]);
  for (Eigen::Index i = 1; i < coarse.size(); ++i) {
    u_min = std::min(u_min, eval_u(potential, coarse.nodes[i]));
  }
  const double z =
      integrate(coarse, [&](double x) {
        return std::exp(-(eval_u(potential, x) - u_min));
      }).value;
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw NumericError("density normalisation failed on [-a, a]");
  }
  const double log_z = std::log(z) - u_min;
  return [potential, log_z](double x) {
    return std::exp(-eval_u(potential, x) - log_z);
  };
}

double pi_expectation(const Potential& potential, const QuadratureGrid& grid,
                      const ScalarFunction& f) {
  const ScalarFunction pi = density_function(potential, grid.a);
  return integrate(grid, [&](double x) { return f(x) * pi(x); }).value;
}

PoissonDerivative::PoissonDerivative(Eigen::VectorXd nodes,
                                     Eigen::VectorXd values,
                                     std::vector<bool> valid, double pi_f)
    : nodes_(std::move(nodes)),
      values_(std::move(values)),
      valid_(std::move(valid)),
      pi_f_(pi_f) {}

double PoissonDerivative::operator()(double x) const {
  const Eigen::Index n = nodes_.size();
  if (x <= nodes_[0]) return values_[0];
  if (x >= nodes_[n - 1]) return values_[n - 1];
  const double h = (nodes_[n - 1] - nodes_[0]) / static_cast<double>(n - 1);
  const auto i = std::min<Eigen::Index>(
      static_cast<Eigen::Index>((x - nodes_[0]) / h), n - 2);
  const double t = (x - nodes_[i]) / h;
  return (1.0 - t) * values_[i] + t * values_[i + 1];
}

PoissonDerivative poisson_derivative(const Potential& potential,
                                     const QuadratureGrid& grid,
                                     const ScalarFunction& f) {
  const GridDensity density = density_on_grid(potential, grid);
  const Eigen::VectorXd fv = tabulate(grid, f);
  const double pi_f = simpson(grid, fv.cwiseProduct(density.pi));
  const Eigen::VectorXd q = density.pi.cwiseProduct(
      (fv.array() - pi_f).matrix());
  const double h = grid.step();
  const Eigen::Index n = grid.size();
  Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
  std::vector<bool> valid(static_cast<std::size_t>(n));
  // Cumulative trapezoid with the Euler-Maclaurin end correction
  // -h^2/12 (q'(x_i) - q'(x_0)), q' by second-order differences.
  Eigen::VectorXd dq(n);
  dq[0] = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * h);
  dq[n - 1] = (3.0 * q[n - 1] - 4.0 * q[n - 2] + q[n - 3]) / (2.0 * h);
  for (Eigen::Index i = 1; i + 1 < n; ++i) dq[i] = (q[i + 1] - q[i - 1]) / (2.0 * h);
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) cumulative += 0.5 * h * (q[i - 1] + q[i]);
    const bool ok = density.pi[i] > kDensityFloor;
    valid[static_cast<std::size_t>(i)] = ok;
    const double integral = cumulative - h * h / 12.0 * (dq[i] - dq[0]);
    if (ok) values[i] = -integral / density.pi[i];
  }
  return PoissonDerivative(grid.nodes, std::move(values), std::move(valid), pi_f);
}

namespace {

double sigma2_from(const QuadratureGrid& grid, const GridDensity& density,
                   const PoissonDerivative& dpois) {
  const Eigen::VectorXd integrand =
      density.pi.cwiseProduct(dpois.values().cwiseAbs2());
  return 2.0 * simpson(grid, integrand);
}

ExactMoments moments_from(const Potential& potential, const QuadratureGrid& grid,
                          const GridDensity& density, const ControlBasis& basis,
                          const ScalarFunction& f) {
  if (basis.dim() != 1) throw ShapeError("oracle1d needs a 1D basis");
  const Eigen::Index p = basis.count();
  const Eigen::VectorXd fv = tabulate(grid, f);
  ExactMoments out;
  out.pi_f = simpson(grid, fv.cwiseProduct(density.pi));
  out.h = Eigen::MatrixXd::Zero(p, p);
  out.h_zv = Eigen::MatrixXd::Zero(p, p);
  out.b = Eigen::VectorXd::Zero(p);
  out.b_zv = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd x(1);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double w = grid.weights[i] * density.pi[i];
    if (w == 0.0) continue;
    x[0] = grid.nodes[i];
    const BasisEval eval = basis.evaluate(x);
    const Eigen::VectorXd lpsi = generator_values(eval, potential.grad_u(x));
    const Eigen::VectorXd dpsi = eval.gradients.col(0);
    const double ft = fv[i] - out.pi_f;
    out.h.noalias() += w * dpsi * dpsi.transpose();
    out.h_zv.noalias() += w * lpsi * lpsi.transpose();
    out.b += (w * ft) * eval.values;
    out.b_zv += (w * ft) * lpsi;
  }
  out.h = 0.5 * (out.h + out.h.transpose()).eval();
  out.h_zv = 0.5 * (out.h_zv + out.h_zv.transpose()).eval();
  return out;
}

}  // namespace

double sigma2_inf(const Potential& potential, const QuadratureGrid& grid,
                  const ScalarFunction& f) {
  const GridDensity density = density_on_grid(potential, grid);
  return sigma2_from(grid, density, poisson_derivative(potential, grid, f));
}

ExactMoments exact_moments(const Potential& potential, const QuadratureGrid& grid,
                           const ControlBasis& basis, const ScalarFunction& f) {
  return moments_from(potential, grid, density_on_grid(potential, grid), basis, f);
}

ExactTheta exact_theta(const ExactMoments& moments) {
  Eigen::Index rank_h = 0;
  Eigen::Index rank_zv = 0;
  ExactTheta out;
  out.theta_star = pinv(moments.h, &rank_h) * moments.b;
  out.theta_zv = -(pinv(moments.h_zv, &rank_zv) * moments.b_zv);
  out.rank_deficient =
      rank_h < moments.h.rows() || rank_zv < moments.h_zv.rows();
  return out;
}

ExactTheta exact_theta(const Potential& potential, const QuadratureGrid& grid,
                       const ControlBasis& basis, const ScalarFunction& f) {
  return exact_theta(exact_moments(potential, grid, basis, f));
}

double sigma2_with_cv(double sigma2_f, const Eigen::MatrixXd& h,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& theta) {
  if (h.rows() != h.cols() || h.rows() != b.size() || b.size() != theta.size()) {
    throw ShapeError("sigma2_with_cv: inconsistent shapes");
  }
  return 2.0 * theta.dot(h * theta) - 4.0 * theta.dot(b) + sigma2_f;
}

namespace {

OracleReport report_on(const Potential& potential, const ControlBasis& basis,
                       const ScalarFunction& f, const QuadratureGrid& grid) {
  const GridDensity density = density_on_grid(potential, grid);
  const PoissonDerivative dpois = poisson_derivative(potential, grid, f);
  const ExactMoments moments = moments_from(potential, grid, density, basis, f);
  const ExactTheta theta = exact_theta(moments);
  OracleReport r;
  r.a = grid.a;
  r.mass = density.mass;
  r.pi_f = moments.pi_f;
  r.sigma2_f = sigma2_from(grid, density, dpois);
  r.h = moments.h;
  r.b = moments.b;
  r.h_zv = moments.h_zv;
  r.b_zv = moments.b_zv;
  r.theta_star = theta.theta_star;
  r.theta_zv = theta.theta_zv;
  r.sigma2_cv = sigma2_with_cv(r.sigma2_f, r.h, r.b, r.theta_star);
  r.sigma2_zv = sigma2_with_cv(r.sigma2_f, r.h, r.b, r.theta_zv);
  r.nodes = grid.size();
  r.rank_deficient = theta.rank_deficient;
  return r;
}

bool close(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace

OracleReport oracle_report(const Potential& potential, const ControlBasis& basis,
                           const ScalarFunction& f, double a, double rel_tol) {
  require_1d(potential);
  QuadratureGrid grid = make_grid(a, 4097);
  OracleReport previous = report_on(potential, basis, f, grid);
  while (grid.size() < kMaxQuadratureNodes) {
    grid = grid.refined();
    OracleReport current = report_on(potential, basis, f, grid);
    const bool stable =
        std::abs(current.sigma2_f - previous.sigma2_f) <=
            rel_tol * std::max(1.0, std::abs(current.sigma2_f)) &&
        close(current.theta_star, previous.theta_star, rel_tol) &&
        close(current.theta_zv, previous.theta_zv, rel_tol);
    previous = std::move(current);
    if (stable) {
      previous.converged = true;
      break;
    }
  }
  return previous;
}

std::vector<OracleReport> truncation_sweep(const Potential& potential,
                                           const ControlBasis& basis,
                                           const ScalarFunction& f,
                                           const std::vector<double>& boundaries) {
  std::vector<OracleReport> out;
  out.reserve(boundaries.size());
  for (double a : boundaries) out.push_back(oracle_report(potential, basis, f, a));
  return out;
}

GaussHermiteRule gauss_hermite(int count) {
  if (count < 1) throw ParameterError("Gauss-Hermite needs >= 1 node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd sub(std::max(count - 1, 0));
  for (int k = 1; k < count; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericError("Gauss-Hermite eigenproblem did not converge");
  }
  GaussHermiteRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = std::sqrt(std::numbers::pi) *
                 solver.eigenvectors().row(0).transpose().cwiseAbs2();
  return rule;
}

double ula_pullback(const Potential& potential, int hermite_nodes, double gamma,
                    const ScalarFunction& f, double x) {
  require_1d(potential);
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  const GaussHermiteRule rule = gauss_hermite(hermite_nodes);
  const double mean = x - gamma * eval_du(potential, x);
  // Z = sqrt(2) t under the weight exp(-t^2) / sqrt(pi).
  const double scale = 2.0 * std::sqrt(gamma);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(mean + scale * rule.nodes[i]);
  }
  return acc / std::sqrt(std::numbers::pi);
}

}  // namespace lcv
