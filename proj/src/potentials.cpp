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

#include "lcv/potentials.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "lcv/errors.hpp"
#include "lcv/rng.hpp"

namespace lcv {

Potential::Potential(int dim, EnergyFn u, GradientFn grad_u, std::string label,
                     std::optional<double> log_normalizer)
    : dim_(dim),
      u_(std::move(u)),
      grad_u_(std::move(grad_u)),
      label_(std::move(label)),
      log_normalizer_(log_normalizer) {
  if (dim_ < 1) throw ParameterError("potential dimension must be positive");
  if (!u_ || !grad_u_) throw ParameterError("potential needs U and grad U");
}

void Potential::check(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) {
    throw ShapeError(label_ + ": point of dimension " +
                     std::to_string(x.size()) + ", expected " +
                     std::to_string(dim_));
  }
}

double Potential::u(const Eigen::VectorXd& x) const {
  check(x);
  return u_(x);
}

Eigen::VectorXd Potential::grad_u(const Eigen::VectorXd& x) const {
  check(x);
  return grad_u_(x);
}

void RegressionData::validate() const {
  if (design.rows() < 1 || design.cols() < 1) {
    throw DataError("regression data: empty design matrix");
  }
  if (labels.size() != design.rows()) {
    throw DataError("regression data: " + std::to_string(labels.size()) +
                    " labels for " + std::to_string(design.rows()) + " rows");
  }
  if (design.array().isNaN().any()) {
    throw DataError("regression data: design contains NaN");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw DataError("regression data: label " + std::to_string(labels[i]) +
                      " in row " + std::to_string(i + 1) + " is not 0/1");
    }
  }
  if (!(prior_variance > 0.0)) {
    throw ParameterError("regression data: prior variance must be positive");
  }
}

Potential mixture1d_potential(double mean1, double mean2, double variance) {
  if (!(variance > 0.0)) {
    throw ParameterError("mixture1d: variance must be positive");
  }
  const double inv2v = 0.5 / variance;
  // -log of an equal-weight sum, evaluated by log-sum-exp.
  auto u = [=](const Eigen::VectorXd& x) {
    const double a1 = (x[0] - mean1) * (x[0] - mean1) * inv2v;
    const double a2 = (x[0] - mean2) * (x[0] - mean2) * inv2v;
    const double lo = std::min(a1, a2);
    return lo - std::log(0.5 * (std::exp(lo - a1) + std::exp(lo - a2)));
  };
  auto grad = [=](const Eigen::VectorXd& x) {
    const double a1 = (x[0] - mean1) * (x[0] - mean1) * inv2v;
    const double a2 = (x[0] - mean2) * (x[0] - mean2) * inv2v;
    const double lo = std::min(a1, a2);
    const double e1 = std::exp(lo - a1);
    const double e2 = std::exp(lo - a2);
    const double g = (e1 * (x[0] - mean1) + e2 * (x[0] - mean2)) /
                     ((e1 + e2) * variance);
    return Eigen::VectorXd::Constant(1, g);
  };
  const double log_z = 0.5 * std::log(2.0 * std::numbers::pi * variance);
  return Potential(1, u, grad, "mixture1d", log_z);
}

Potential gaussian_potential(int dim, const Eigen::MatrixXd& precision) {
  if (dim < 1) throw ParameterError("gaussian: dimension must be positive");
  if (precision.rows() != dim || precision.cols() != dim) {
    throw ParameterError("gaussian: precision must be dim x dim");
  }
  if (!precision.allFinite() ||
      (precision - precision.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, precision.cwiseAbs().maxCoeff())) {
    throw ParameterError("gaussian: precision must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw ParameterError("gaussian: precision must be positive definite");
  }
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_z =
      0.5 * dim * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
  Eigen::MatrixXd lambda = precision;
  auto u = [lambda](const Eigen::VectorXd& x) {
    return 0.5 * x.dot(lambda * x);
  };
  auto grad = [lambda](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return lambda * x;
  };
  return Potential(dim, u, grad, "gaussian", log_z);
}

namespace {

// log(1 + e^t) without overflow.
double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double normal_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

Potential logistic_potential(RegressionData data) {
  data.validate();
  auto shared = std::make_shared<const RegressionData>(std::move(data));
  auto u = [shared](const Eigen::VectorXd& x) {
    const Eigen::VectorXd t = shared->design * x;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      acc += softplus(t[i]) - shared->labels[i] * t[i];
    }
    return acc + x.squaredNorm() / (2.0 * shared->prior_variance);
  };
  auto grad = [shared](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd r = shared->design * x;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      r[i] = sigmoid(r[i]) - shared->labels[i];
    }
    return shared->design.transpose() * r + x / shared->prior_variance;
  };
  return Potential(shared->dim(), u, grad, "logistic");
}

namespace probit {

double tail_series(double s) {
  const double inv_s2 = 1.0 / (s * s);
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv_s2;
    if (std::abs(next) >= std::abs(term)) break;  // series starts diverging
    sum += next;
    term = next;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

double log_cdf(double t) {
  if (t > kSeriesBranch) {
    if (t < 0.0) return std::log(0.5 * std::erfc(-t / std::numbers::sqrt2));
    return std::log1p(-0.5 * std::erfc(t / std::numbers::sqrt2));
  }
  const double s = -t;
  return -0.5 * s * s - std::log(s) -
         0.5 * std::log(2.0 * std::numbers::pi) + std::log(tail_series(s));
}

double hazard(double t) {
  if (t > kSeriesBranch) {
    return normal_pdf(t) / (0.5 * std::erfc(-t / std::numbers::sqrt2));
  }
  const double s = -t;
  return s / tail_series(s);
}

}  // namespace probit

Potential probit_potential(RegressionData data) {
  data.validate();
  auto shared = std::make_shared<const RegressionData>(std::move(data));
  auto u = [shared](const Eigen::VectorXd& x) {
    const Eigen::VectorXd t = shared->design * x;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double y = shared->labels[i];
      acc -= y * probit::log_cdf(t[i]) + (1.0 - y) * probit::log_cdf(-t[i]);
    }
    return acc + x.squaredNorm() / (2.0 * shared->prior_variance);
  };
  auto grad = [shared](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd r = shared->design * x;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double y = shared->labels[i];
      r[i] = (1.0 - y) * probit::hazard(-r[i]) - y * probit::hazard(r[i]);
    }
    return shared->design.transpose() * r + x / shared->prior_variance;
  };
  return Potential(shared->dim(), u, grad, "probit");
}

Eigen::VectorXd find_mode(const Potential& potential, Eigen::VectorXd x,
                          double tol, int max_iter) {
  if (!(tol > 0.0) || max_iter < 1) {
    throw ParameterError("find_mode: tol and max_iter must be positive");
  }
  constexpr double kArmijo = 1e-4;
  constexpr double kShrink = 0.5;
  const Eigen::Index d = x.size();
  // Quasi-Newton with an inverse-Hessian estimate, backtracking line search.
  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(d, d);
  double ux = potential.u(x);
  Eigen::VectorXd g = potential.grad_u(x);
  for (int iter = 0; iter < max_iter; ++iter) {
    const double gnorm = g.norm();
    if (gnorm <= tol) return x;
    Eigen::VectorXd dir = -(inv_h * g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      inv_h.setIdentity();
      dir = -g;
      slope = -gnorm * gnorm;
    }
    double step = 1.0;
    Eigen::VectorXd trial = x + step * dir;
    double utrial = potential.u(trial);
    while (!(utrial <= ux + kArmijo * step * slope)) {
      step *= kShrink;
      if (step < 1e-300) {
        throw ConvergenceError("find_mode: line search collapsed", x, gnorm);
      }
      trial = x + step * dir;
      utrial = potential.u(trial);
    }
    Eigen::VectorXd g_new = potential.grad_u(trial);
    const Eigen::VectorXd s = trial - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (iter == 0) inv_h *= sy / y.squaredNorm();
      const Eigen::VectorXd hy = inv_h * y;
      const double rho = 1.0 / sy;
      inv_h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
               rho * (hy * s.transpose() + s * hy.transpose());
    }
    x = std::move(trial);
    ux = utrial;
    g = std::move(g_new);
  }
  const double gnorm = g.norm();
  if (gnorm <= tol) return x;
  throw ConvergenceError("find_mode: iteration limit reached", x, gnorm);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos
                      ? std::string()
                      : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t row,
                    const std::string& column) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw IngestionError("row " + std::to_string(row) + ", column '" + column +
                             "': '" + s + "' is not a number",
                         row);
  }
  return v;
}

}  // namespace

RegressionData load_regression_csv(const std::filesystem::path& path,
                                   const std::string& label_column,
                                   bool intercept, double prior_variance) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'", 0);
  std::string line;
  if (!std::getline(in, line)) {
    throw IngestionError("'" + path.string() + "' has no header row", 0);
  }
  const std::vector<std::string> header = split_fields(line);
  std::ptrdiff_t label_at = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) label_at = static_cast<std::ptrdiff_t>(c);
  }
  if (label_at < 0) {
    throw IngestionError("no column named '" + label_column + "'", 0);
  }
  const std::size_t covariates = header.size() - 1;
  if (covariates == 0 && !intercept) {
    throw IngestionError("no covariate columns", 0);
  }

  std::vector<double> values;
  std::vector<double> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw IngestionError("row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) +
                               " fields, header has " +
                               std::to_string(header.size()),
                           row);
    }
    if (intercept) values.push_back(1.0);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const double v = parse_number(fields[c], row, header[c]);
      if (static_cast<std::ptrdiff_t>(c) == label_at) {
        if (v != 0.0 && v != 1.0) {
          throw IngestionError("row " + std::to_string(row) + ": label '" +
                                   fields[c] + "' is not 0 or 1",
                               row);
        }
        labels.push_back(v);
      } else {
        if (std::isnan(v)) {
          throw IngestionError("row " + std::to_string(row) + ": NaN value",
                               row);
        }
        values.push_back(v);
      }
    }
  }
  if (row == 0) throw IngestionError("'" + path.string() + "' has no rows", 0);

  const Eigen::Index cols = static_cast<Eigen::Index>(covariates) + (intercept ? 1 : 0);
  RegressionData data;
  data.design = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                               Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(row), cols);
  data.labels = Eigen::Map<const Eigen::VectorXd>(labels.data(),
                                                  static_cast<Eigen::Index>(row));
  data.prior_variance = prior_variance;
  data.validate();
  return data;
}

Eigen::VectorXd synthetic_coefficients(int dim) {
  static constexpr double kPattern[] = {1.0, -0.5, 0.75, -0.25};
  Eigen::VectorXd beta(dim);
  for (int k = 0; k < dim; ++k) beta[k] = kPattern[k % 4];
  return beta;
}

RegressionData synthetic_regression(int rows, int dim, std::uint64_t seed,
                                    LinkModel model, double prior_variance) {
  if (rows < 1 || dim < 1) {
    throw ParameterError("synthetic data: rows and dim must be positive");
  }
  Rng rng(seed);
  const Eigen::VectorXd beta = synthetic_coefficients(dim);
  RegressionData data;
  data.design.resize(rows, dim);
  data.labels.resize(rows);
  data.prior_variance = prior_variance;
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k < dim; ++k) data.design(i, k) = rng.normal();
    const double t = data.design.row(i).dot(beta);
    const double prob = model == LinkModel::logistic
                            ? sigmoid(t)
                            : 0.5 * std::erfc(-t / std::numbers::sqrt2);
    data.labels[i] = rng.uniform() < prob ? 1.0 : 0.0;
  }
  return data;
}

}  // namespace lcv
