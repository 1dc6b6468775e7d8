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

#ifndef LCV_SAMPLERS_HPP_
#define LCV_SAMPLERS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lcv/potentials.hpp"

namespace lcv {

enum class Algorithm { ULA, MALA, RWM };

std::string to_string(Algorithm a);
// Accepts "ULA", "MALA", "RWM" in any case; throws ParameterError otherwise.
Algorithm parse_algorithm(const std::string& name);

// Kernel family and its scalar parameter: the step size for ULA and MALA,
// half the proposal variance for RWM.
struct KernelSpec {
  Algorithm algorithm = Algorithm::ULA;
  double gamma = 1e-2;

  void validate() const;
};

using SampleMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Post-burn-in trajectory of one chain with its provenance.
struct ChainOutput {
  SampleMatrix samples;        // length x dim
  std::uint64_t accepted = 0;  // over all burn_in + length steps
  std::uint64_t seed = 0;
  KernelSpec spec;
  std::uint64_t burn_in = 0;
  std::uint64_t length = 0;
  Eigen::VectorXd x0;

  double acceptance_rate() const {
    return static_cast<double>(accepted) /
           static_cast<double>(burn_in + length);
  }
};

struct StepResult {
  Eigen::VectorXd state;
  bool accepted = false;
};

// x - gamma grad U(x) + sqrt(2 gamma) z. Throws NumericError if grad U(x) is
// not finite.
Eigen::VectorXd ula_step(const Potential& potential, double gamma,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& z);

// MALA log acceptance exponent: with y = ula_step(x, z),
//   tau = U(y) - U(x)
//       + (|z - sqrt(gamma/2) (grad U(x) + grad U(y))|^2 - |z|^2) / 2,
// the proposal being accepted with probability min(1, exp(-tau)).
double mala_log_tau(const Potential& potential, double gamma,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& z);

// One MALA transition driven by the noise z and the uniform u in [0, 1).
StepResult mala_step(const Potential& potential, double gamma,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                     double u);

// U(x + sqrt(2 gamma) z) - U(x).
double rwm_log_tau(const Potential& potential, double gamma,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& z);

// One random-walk Metropolis transition with proposal x + sqrt(2 gamma) z.
StepResult rwm_step(const Potential& potential, double gamma,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                    double u);

// Runs burn_in + length transitions from x0 and keeps the last `length`
// states. Each step draws dim standard normals and, for MALA and RWM, one
// uniform. Bit-reproducible for fixed arguments. Throws DivergenceError on
// the first non-finite state.
ChainOutput run_chain(const Potential& potential, const KernelSpec& spec,
                      const Eigen::VectorXd& x0, std::uint64_t burn_in,
                      std::uint64_t length, std::uint64_t seed);

// `replicas` independent chains; replica r is seeded with
// replica_seed(base_seed, r). The result does not depend on `threads`
// (0 = hardware concurrency).
std::vector<ChainOutput> run_replicas(const Potential& potential,
                                      const KernelSpec& spec,
                                      const Eigen::VectorXd& x0,
                                      std::uint64_t burn_in,
                                      std::uint64_t length,
                                      std::uint64_t base_seed,
                                      std::uint32_t replicas,
                                      unsigned threads = 0);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Monte Carlo estimate of the one-step RWM expectation R_gamma f(x), using
// antithetic noise pairs (z, -z) and the exact acceptance probability in
// place of the uniform draw.
MonteCarloEstimate rwm_pullback_mc(const Potential& potential, double gamma,
                                   const std::function<double(double)>& f,
                                   double x, std::uint64_t pairs,
                                   std::uint64_t seed);

}  // namespace lcv

#endif  // LCV_SAMPLERS_HPP_
