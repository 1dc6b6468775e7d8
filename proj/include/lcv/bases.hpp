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

#ifndef LCV_BASES_HPP_
#define LCV_BASES_HPP_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lcv/potentials.hpp"

namespace lcv {

enum class BasisKind { first_order, second_order, gaussian_kernels_1d };

// All members of a basis evaluated at one point.
struct BasisEval {
  Eigen::VectorXd values;       // p
  Eigen::MatrixXd gradients;    // p x dim, row i is grad psi_i
  Eigen::VectorXd laplacians;   // p
};

// Finite family psi = (psi_1, ..., psi_p) of smooth functions on R^dim used to
// build control functions g_theta = <theta, psi>. Members are indexed from 0.
class ControlBasis {
 public:
  BasisKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int count() const;

  BasisEval evaluate(const Eigen::VectorXd& x) const;
  Eigen::VectorXd values(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd gradients(const Eigen::VectorXd& x) const;
  Eigen::VectorXd laplacians(const Eigen::VectorXd& x) const;

  double psi(int i, const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad_psi(int i, const Eigen::VectorXd& x) const;
  double lap_psi(int i, const Eigen::VectorXd& x) const;

  // Same basis followed by the constant function 1.
  ControlBasis with_constant() const;
  bool has_constant() const { return constant_; }

  // Kernel centres (gaussian_kernels_1d only).
  const std::vector<double>& centers() const { return centers_; }

  // e.g. "first", "second", "gaussian_kernels(4,-4,4)"; explicit centre
  // lists print as "gaussian_kernels[c1,c2,...]".
  std::string describe() const;

 private:
  friend ControlBasis first_order_basis(int dim);
  friend ControlBasis second_order_basis(int dim);
  friend ControlBasis gaussian_kernel_basis_1d(int p, double lo, double hi);
  friend ControlBasis gaussian_kernel_basis_1d(std::vector<double> centers);

  ControlBasis(BasisKind kind, int dim) : kind_(kind), dim_(dim) {}
  int core_count() const;
  void check(const Eigen::VectorXd& x) const;
  void check_member(int i) const;

  BasisKind kind_;
  int dim_;
  std::vector<double> centers_;
  // Set when the kernels come from an evenly spaced (p, lo, hi) layout.
  std::string layout_;
  // Cross terms x_a x_b of the second-order basis, 0-based with a > b,
  // in member order.
  std::vector<std::pair<int, int>> cross_;
  bool constant_ = false;
};

// psi_i(x) = x_i, i < dim.
ControlBasis first_order_basis(int dim);

// dim(dim+3)/2 members: x_k, then x_k^2, then cross products x_i x_j (i > j)
// placed at second_order_cross_index(dim, i, j).
ControlBasis second_order_basis(int dim);

// 1-based member index 2d + (j-1)(d - j/2) + (i - j) of the cross product
// x_i x_j, 1 <= j < i <= d (1-based i, j).
int second_order_cross_index(int dim, int i, int j);

// p standard Gaussian bumps (2 pi)^{-1/2} exp(-(x - mu)^2 / 2) with centres
// equally spaced on [lo, hi], both endpoints included; a single centre sits at
// the midpoint.
ControlBasis gaussian_kernel_basis_1d(int p, double lo, double hi);
// Same family with explicit centres (duplicates allowed).
ControlBasis gaussian_kernel_basis_1d(std::vector<double> centers);

// L psi_i(x) = -<grad U(x), grad psi_i(x)> + Laplacian psi_i(x), for all i.
Eigen::VectorXd generator_values(const BasisEval& eval,
                                 const Eigen::VectorXd& grad_u);
Eigen::VectorXd generator_values(const Potential& potential,
                                 const ControlBasis& basis,
                                 const Eigen::VectorXd& x);

// L g_theta(x) for g_theta = <theta, psi>.
double generator_apply(const Potential& potential, const ControlBasis& basis,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& x);

}  // namespace lcv

#endif  // LCV_BASES_HPP_
