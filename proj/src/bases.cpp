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

#include "lcv/bases.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lcv/errors.hpp"

namespace lcv {

namespace {

const double kKernelScale = 1.0 / std::sqrt(2.0 * std::numbers::pi);

}  // namespace

int ControlBasis::core_count() const {
  switch (kind_) {
    case BasisKind::first_order:
      return dim_;
    case BasisKind::second_order:
      return dim_ * (dim_ + 3) / 2;
    case BasisKind::gaussian_kernels_1d:
      return static_cast<int>(centers_.size());
  }
  return 0;
}

int ControlBasis::count() const { return core_count() + (constant_ ? 1 : 0); }

void ControlBasis::check(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) {
    throw ShapeError("basis of dimension " + std::to_string(dim_) +
                     " evaluated at a point of dimension " +
                     std::to_string(x.size()));
  }
}

void ControlBasis::check_member(int i) const {
  if (i < 0 || i >= count()) {
    throw ShapeError("basis member " + std::to_string(i) + " out of range");
  }
}

BasisEval ControlBasis::evaluate(const Eigen::VectorXd& x) const {
  check(x);
  const int p = count();
  BasisEval out{Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Zero(p, dim_),
                Eigen::VectorXd::Zero(p)};
  switch (kind_) {
    case BasisKind::first_order:
      out.values.head(dim_) = x;
      out.gradients.topRows(dim_).setIdentity();
      break;
    case BasisKind::second_order: {
      const int d = dim_;
      out.values.head(d) = x;
      out.values.segment(d, d) = x.array().square().matrix();
      for (int k = 0; k < d; ++k) {
        out.gradients(k, k) = 1.0;
        out.gradients(d + k, k) = 2.0 * x[k];
        out.laplacians[d + k] = 2.0;
      }
      for (std::size_t c = 0; c < cross_.size(); ++c) {
        const auto [a, b] = cross_[c];
        const int row = 2 * d + static_cast<int>(c);
        out.values[row] = x[a] * x[b];
        out.gradients(row, a) = x[b];
        out.gradients(row, b) = x[a];
      }
      break;
    }
    case BasisKind::gaussian_kernels_1d:
      for (std::size_t i = 0; i < centers_.size(); ++i) {
        const double r = x[0] - centers_[i];
        const double v = kKernelScale * std::exp(-0.5 * r * r);
        out.values[i] = v;
        out.gradients(i, 0) = -r * v;
        out.laplacians[i] = (r * r - 1.0) * v;
      }
      break;
  }
  if (constant_) out.values[p - 1] = 1.0;
  return out;
}

Eigen::VectorXd ControlBasis::values(const Eigen::VectorXd& x) const {
  return evaluate(x).values;
}

Eigen::MatrixXd ControlBasis::gradients(const Eigen::VectorXd& x) const {
  return evaluate(x).gradients;
}

Eigen::VectorXd ControlBasis::laplacians(const Eigen::VectorXd& x) const {
  return evaluate(x).laplacians;
}

double ControlBasis::psi(int i, const Eigen::VectorXd& x) const {
  check_member(i);
  return evaluate(x).values[i];
}

Eigen::VectorXd ControlBasis::grad_psi(int i, const Eigen::VectorXd& x) const {
  check_member(i);
  return evaluate(x).gradients.row(i).transpose();
}

double ControlBasis::lap_psi(int i, const Eigen::VectorXd& x) const {
  check_member(i);
  return evaluate(x).laplacians[i];
}

ControlBasis ControlBasis::with_constant() const {
  ControlBasis out = *this;
  out.constant_ = true;
  return out;
}

std::string ControlBasis::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case BasisKind::first_order:
      os << "first";
      break;
    case BasisKind::second_order:
      os << "second";
      break;
    case BasisKind::gaussian_kernels_1d:
      if (!layout_.empty()) {
        os << "gaussian_kernels(" << layout_ << ")";
        break;
      }
      os.precision(17);
      os << "gaussian_kernels[";
      for (std::size_t i = 0; i < centers_.size(); ++i) {
        os << (i ? "," : "") << centers_[i];
      }
      os << "]";
      break;
  }
  if (constant_) os << "+const";
  return os.str();
}

ControlBasis first_order_basis(int dim) {
  if (dim < 1) throw ParameterError("first-order basis: dim must be >= 1");
  return ControlBasis(BasisKind::first_order, dim);
}

int second_order_cross_index(int dim, int i, int j) {
  if (!(1 <= j && j < i && i <= dim)) {
    throw ParameterError("cross index needs 1 <= j < i <= dim");
  }
  // (j-1)(d - j/2) == (j-1)(2d - j)/2, which is always an integer.
  return 2 * dim + (j - 1) * (2 * dim - j) / 2 + (i - j);
}

ControlBasis second_order_basis(int dim) {
  if (dim < 1) throw ParameterError("second-order basis: dim must be >= 1");
  ControlBasis basis(BasisKind::second_order, dim);
  const int crosses = dim * (dim - 1) / 2;
  basis.cross_.assign(crosses, {-1, -1});
  for (int j = 1; j <= dim; ++j) {
    for (int i = j + 1; i <= dim; ++i) {
      const int slot = second_order_cross_index(dim, i, j) - 2 * dim - 1;
      if (slot < 0 || slot >= crosses || basis.cross_[slot].first >= 0) {
        throw ParameterError("second-order basis: cross index not bijective");
      }
      basis.cross_[slot] = {i - 1, j - 1};
    }
  }
  return basis;
}

ControlBasis gaussian_kernel_basis_1d(int p, double lo, double hi) {
  if (p < 1) throw ParameterError("gaussian kernels: p must be >= 1");
  if (!(lo < hi)) throw ParameterError("gaussian kernels: need lo < hi");
  std::vector<double> centers(p);
  if (p == 1) {
    centers[0] = 0.5 * (lo + hi);
  } else {
    for (int i = 0; i < p; ++i) centers[i] = lo + i * (hi - lo) / (p - 1);
    centers[p - 1] = hi;
  }
  ControlBasis basis = gaussian_kernel_basis_1d(std::move(centers));
  std::ostringstream layout;
  layout.precision(17);
  layout << p << "," << lo << "," << hi;
  basis.layout_ = layout.str();
  return basis;
}

ControlBasis gaussian_kernel_basis_1d(std::vector<double> centers) {
  if (centers.empty()) throw ParameterError("gaussian kernels: no centres");
  ControlBasis basis(BasisKind::gaussian_kernels_1d, 1);
  basis.centers_ = std::move(centers);
  return basis;
}

Eigen::VectorXd generator_values(const BasisEval& eval,
                                 const Eigen::VectorXd& grad_u) {
  return eval.laplacians - eval.gradients * grad_u;
}

Eigen::VectorXd generator_values(const Potential& potential,
                                 const ControlBasis& basis,
                                 const Eigen::VectorXd& x) {
  if (basis.dim() != potential.dim()) {
    throw ShapeError("basis and potential dimensions differ");
  }
  return generator_values(basis.evaluate(x), potential.grad_u(x));
}

double generator_apply(const Potential& potential, const ControlBasis& basis,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
  if (theta.size() != basis.count()) {
    throw ShapeError("theta has " + std::to_string(theta.size()) +
                     " entries, basis has " + std::to_string(basis.count()));
  }
  return theta.dot(generator_values(potential, basis, x));
}

}  // namespace lcv
