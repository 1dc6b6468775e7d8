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

#include "lcv/cv.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "lcv/errors.hpp"

namespace lcv {

std::string to_string(FitMethod m) { return m == FitMethod::CV ? "CV" : "ZV"; }

namespace {

// Entrywise Kahan-compensated running sum of equally shaped matrices.
class KahanSum {
 public:
  KahanSum(Eigen::Index rows, Eigen::Index cols)
      : sum_(Eigen::MatrixXd::Zero(rows, cols)),
        comp_(Eigen::MatrixXd::Zero(rows, cols)),
        y_(rows, cols),
        t_(rows, cols) {}

  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& term) {
    y_ = term - comp_;
    t_ = sum_ + y_;
    comp_ = (t_ - sum_) - y_;
    sum_.swap(t_);
  }

  const Eigen::MatrixXd& value() const { return sum_; }

 private:
  Eigen::MatrixXd sum_;
  Eigen::MatrixXd comp_;
  Eigen::MatrixXd y_;
  Eigen::MatrixXd t_;
};

void require_samples(const ChainOutput& chain) {
  if (chain.samples.rows() < 1) throw DataError("chain has no samples");
}

void require_dims(const ChainOutput& chain, const ControlBasis& basis) {
  if (basis.dim() != chain.samples.cols()) {
    throw ShapeError("basis dimension " + std::to_string(basis.dim()) +
                     " differs from chain dimension " +
                     std::to_string(chain.samples.cols()));
  }
}

}  // namespace

SampleMatrix gradient_table(const ChainOutput& chain,
                            const Potential& potential) {
  if (potential.dim() != chain.samples.cols()) {
    throw ShapeError("potential dimension differs from chain dimension");
  }
  SampleMatrix grads(chain.samples.rows(), chain.samples.cols());
  Eigen::VectorXd x(chain.samples.cols());
  for (Eigen::Index k = 0; k < chain.samples.rows(); ++k) {
    x = chain.samples.row(k).transpose();
    grads.row(k) = potential.grad_u(x).transpose();
  }
  return grads;
}

Moments BatchMoments::cv(std::size_t k) const {
  return Moments{h_cv, b_cv.col(static_cast<Eigen::Index>(k)),
                 mean_f[static_cast<Eigen::Index>(k)], m, FitMethod::CV};
}

Moments BatchMoments::zv(std::size_t k) const {
  return Moments{h_zv, b_zv.col(static_cast<Eigen::Index>(k)),
                 mean_f[static_cast<Eigen::Index>(k)], m, FitMethod::ZV};
}

BatchMoments batch_moments(const ChainOutput& chain, const SampleMatrix& grads,
                           const ControlBasis& basis,
                           const std::vector<TestFunction>& fs) {
  require_samples(chain);
  require_dims(chain, basis);
  if (grads.rows() != chain.samples.rows() ||
      grads.cols() != chain.samples.cols()) {
    throw ShapeError("gradient table does not match the chain");
  }
  const Eigen::Index p = basis.count();
  const Eigen::Index nf = static_cast<Eigen::Index>(fs.size());
  const Eigen::Index m = chain.samples.rows();

  KahanSum h_cv(p, p), h_zv(p, p);
  KahanSum s_psi_f(p, nf), s_lpsi_f(p, nf);
  KahanSum s_psi(p, 1), s_lpsi(p, 1), s_f(nf, 1);
  Eigen::VectorXd x(chain.samples.cols());
  Eigen::VectorXd g(chain.samples.cols());
  Eigen::VectorXd fx(nf);
  for (Eigen::Index k = 0; k < m; ++k) {
    x = chain.samples.row(k).transpose();
    g = grads.row(k).transpose();
    const BasisEval eval = basis.evaluate(x);
    const Eigen::VectorXd lpsi = generator_values(eval, g);
    for (Eigen::Index j = 0; j < nf; ++j) fx[j] = fs[j](x);
    h_cv.add(eval.gradients * eval.gradients.transpose());
    h_zv.add(lpsi * lpsi.transpose());
    s_psi_f.add(eval.values * fx.transpose());
    s_lpsi_f.add(lpsi * fx.transpose());
    s_psi.add(eval.values);
    s_lpsi.add(lpsi);
    s_f.add(fx);
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  BatchMoments out;
  out.m = static_cast<std::uint64_t>(m);
  out.mean_f = s_f.value().col(0) * inv_m;
  out.h_cv = h_cv.value() * inv_m;
  out.h_zv = h_zv.value() * inv_m;
  // sum psi (f - mean_f) = sum psi f - mean_f sum psi.
  out.b_cv = (s_psi_f.value() - s_psi.value() * out.mean_f.transpose()) * inv_m;
  out.b_zv = (s_lpsi_f.value() - s_lpsi.value() * out.mean_f.transpose()) * inv_m;
  // Enforce exact symmetry of the Gram matrices.
  out.h_cv = 0.5 * (out.h_cv + out.h_cv.transpose()).eval();
  out.h_zv = 0.5 * (out.h_zv + out.h_zv.transpose()).eval();
  return out;
}

Moments cv_moments(const ChainOutput& chain, const Potential& potential,
                   const ControlBasis& basis, const TestFunction& f) {
  require_samples(chain);
  require_dims(chain, basis);
  return batch_moments(chain, gradient_table(chain, potential), basis, {f}).cv(0);
}

Moments zv_moments(const ChainOutput& chain, const Potential& potential,
                   const ControlBasis& basis, const TestFunction& f) {
  require_samples(chain);
  require_dims(chain, basis);
  return batch_moments(chain, gradient_table(chain, potential), basis, {f}).zv(0);
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& a, Eigen::Index* rank) {
  if (!a.allFinite()) throw NumericError("pinv: matrix has non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double rcond = static_cast<double>(std::max(a.rows(), a.cols())) *
                       std::numeric_limits<double>::epsilon();
  const double cutoff = sv.size() ? rcond * sv[0] : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff && sv[i] > 0.0) {
      inv[i] = 1.0 / sv[i];
      ++kept;
    }
  }
  if (rank) *rank = kept;
  return svd.matrixV().leftCols(sv.size()) * inv.asDiagonal() *
         svd.matrixU().leftCols(sv.size()).transpose();
}

CvFit fit(const Moments& moments, FitMethod method) {
  if (moments.h.rows() != moments.h.cols() ||
      moments.h.rows() != moments.b.size()) {
    throw ShapeError("fit: inconsistent moment shapes");
  }
  CvFit out;
  out.h_matrix = moments.h;
  out.b_vector = moments.b;
  out.method = method;
  out.sample_mean_f = moments.mean_f;
  out.m = moments.m;
  out.theta = pinv(moments.h) * moments.b;
  if (method == FitMethod::ZV) out.theta = -out.theta;
  return out;
}

Eigen::VectorXd corrected_series(const ChainOutput& chain,
                                 const Potential& potential,
                                 const ControlBasis& basis,
                                 const Eigen::VectorXd& theta,
                                 const TestFunction& f) {
  require_samples(chain);
  return corrected_series_batch(chain, gradient_table(chain, potential), basis,
                                theta, {f})
      .col(0);
}

Eigen::MatrixXd corrected_series_batch(const ChainOutput& chain,
                                       const SampleMatrix& grads,
                                       const ControlBasis& basis,
                                       const Eigen::MatrixXd& thetas,
                                       const std::vector<TestFunction>& fs) {
  require_dims(chain, basis);
  const Eigen::Index nf = static_cast<Eigen::Index>(fs.size());
  if (thetas.rows() != basis.count() || thetas.cols() != nf) {
    throw ShapeError("corrected series: theta matrix must be p x (#functions)");
  }
  const Eigen::Index n = chain.samples.rows();
  Eigen::MatrixXd out(n, nf);
  Eigen::VectorXd x(chain.samples.cols());
  Eigen::VectorXd g(chain.samples.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    x = chain.samples.row(k).transpose();
    g = grads.row(k).transpose();
    const Eigen::VectorXd lpsi = generator_values(basis.evaluate(x), g);
    for (Eigen::Index j = 0; j < nf; ++j) {
      out(k, j) = fs[j](x) + thetas.col(j).dot(lpsi);
    }
  }
  return out;
}

Eigen::VectorXd plain_series(const ChainOutput& chain, const TestFunction& f) {
  require_samples(chain);
  const Eigen::Index n = chain.samples.rows();
  Eigen::VectorXd out(n);
  Eigen::VectorXd x(chain.samples.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    x = chain.samples.row(k).transpose();
    out[k] = f(x);
  }
  return out;
}

double compensated_mean(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) throw DataError("mean of an empty series");
  double sum = 0.0;
  double comp = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double y = values[i] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(values.size());
}

double cv_estimate(const ChainOutput& chain, const Potential& potential,
                   const ControlBasis& basis, const CvFit& fit,
                   const TestFunction& f) {
  if (fit.theta.size() != basis.count()) {
    throw ShapeError("cv_estimate: theta length differs from basis size");
  }
  return compensated_mean(corrected_series(chain, potential, basis, fit.theta, f));
}

double plain_estimate(const ChainOutput& chain, const TestFunction& f) {
  return compensated_mean(plain_series(chain, f));
}

}  // namespace lcv
