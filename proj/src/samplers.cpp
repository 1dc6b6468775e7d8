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

#include "lcv/samplers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lcv/errors.hpp"
#include "lcv/parallel.hpp"
#include "lcv/rng.hpp"

namespace lcv {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ULA:
      return "ULA";
    case Algorithm::MALA:
      return "MALA";
    case Algorithm::RWM:
      return "RWM";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (up == "ULA") return Algorithm::ULA;
  if (up == "MALA") return Algorithm::MALA;
  if (up == "RWM") return Algorithm::RWM;
  throw ParameterError("unknown algorithm '" + name + "'");
}

void KernelSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("gamma must be a positive finite number");
  }
}

namespace {

// Chain position with the quantities the kernels reuse across steps.
struct State {
  Eigen::VectorXd x;
  double u = 0.0;
  Eigen::VectorXd grad;
};

Eigen::VectorXd checked_gradient(const Potential& potential,
                                 const Eigen::VectorXd& x) {
  Eigen::VectorXd g = potential.grad_u(x);
  if (!g.allFinite()) throw NumericError("non-finite gradient of U", x);
  return g;
}

State make_state(const Potential& potential, const Eigen::VectorXd& x) {
  return State{x, potential.u(x), checked_gradient(potential, x)};
}

// MALA proposal from `from`; fills `to` and returns tau.
double mala_propose(const Potential& potential, double gamma, const State& from,
                    const Eigen::VectorXd& z, State& to) {
  to.x = from.x - gamma * from.grad + std::sqrt(2.0 * gamma) * z;
  to.u = potential.u(to.x);
  to.grad = potential.grad_u(to.x);
  const double r = std::sqrt(0.5 * gamma);
  const double quad =
      (z - r * (from.grad + to.grad)).squaredNorm() - z.squaredNorm();
  return to.u - from.u + 0.5 * quad;
}

double rwm_propose(const Potential& potential, double gamma, const State& from,
                   const Eigen::VectorXd& z, State& to) {
  to.x = from.x + std::sqrt(2.0 * gamma) * z;
  to.u = potential.u(to.x);
  return to.u - from.u;
}

bool accept(double tau, double u) { return u < std::exp(-tau); }

}  // namespace

Eigen::VectorXd ula_step(const Potential& potential, double gamma,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  return x - gamma * checked_gradient(potential, x) + std::sqrt(2.0 * gamma) * z;
}

double mala_log_tau(const Potential& potential, double gamma,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  State to;
  return mala_propose(potential, gamma, make_state(potential, x), z, to);
}

StepResult mala_step(const Potential& potential, double gamma,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                     double u) {
  State to;
  const double tau =
      mala_propose(potential, gamma, make_state(potential, x), z, to);
  if (accept(tau, u)) return {std::move(to.x), true};
  return {x, false};
}

double rwm_log_tau(const Potential& potential, double gamma,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  State from{x, potential.u(x), {}};
  State to;
  return rwm_propose(potential, gamma, from, z, to);
}

StepResult rwm_step(const Potential& potential, double gamma,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                    double u) {
  const double tau = rwm_log_tau(potential, gamma, x, z);
  if (accept(tau, u)) return {x + std::sqrt(2.0 * gamma) * z, true};
  return {x, false};
}

ChainOutput run_chain(const Potential& potential, const KernelSpec& spec,
                      const Eigen::VectorXd& x0, std::uint64_t burn_in,
                      std::uint64_t length, std::uint64_t seed) {
  spec.validate();
  if (length < 1) throw ParameterError("chain length must be >= 1");
  if (x0.size() != potential.dim()) {
    throw ShapeError("initial state has the wrong dimension");
  }
  if (!x0.allFinite()) throw ParameterError("initial state is not finite");

  const int dim = potential.dim();
  const double gamma = spec.gamma;
  ChainOutput out;
  out.samples.resize(static_cast<Eigen::Index>(length), dim);
  out.seed = seed;
  out.spec = spec;
  out.burn_in = burn_in;
  out.length = length;
  out.x0 = x0;

  Rng rng(seed);
  Eigen::VectorXd z(dim);
  State current;
  State proposal;
  current.x = x0;
  if (spec.algorithm != Algorithm::RWM) {
    current.grad = checked_gradient(potential, x0);
  }
  if (spec.algorithm != Algorithm::ULA) current.u = potential.u(x0);

  const std::uint64_t total = burn_in + length;
  for (std::uint64_t step = 0; step < total; ++step) {
    rng.fill_normal(z);
    switch (spec.algorithm) {
      case Algorithm::ULA:
        current.x = current.x - gamma * current.grad + std::sqrt(2.0 * gamma) * z;
        ++out.accepted;
        if (current.x.allFinite()) {
          current.grad = potential.grad_u(current.x);
          if (!current.grad.allFinite()) {
            throw DivergenceError("ULA: non-finite gradient at step " +
                                      std::to_string(step),
                                  step);
          }
        }
        break;
      case Algorithm::MALA: {
        const double tau = mala_propose(potential, gamma, current, z, proposal);
        if (accept(tau, rng.uniform())) {
          std::swap(current, proposal);
          ++out.accepted;
        }
        break;
      }
      case Algorithm::RWM: {
        const double tau = rwm_propose(potential, gamma, current, z, proposal);
        if (accept(tau, rng.uniform())) {
          std::swap(current.x, proposal.x);
          current.u = proposal.u;
          ++out.accepted;
        }
        break;
      }
    }
    if (!current.x.allFinite()) {
      throw DivergenceError(
          to_string(spec.algorithm) + ": non-finite state at step " +
              std::to_string(step),
          step);
    }
    if (step >= burn_in) {
      out.samples.row(static_cast<Eigen::Index>(step - burn_in)) =
          current.x.transpose();
    }
  }
  return out;
}

std::vector<ChainOutput> run_replicas(const Potential& potential,
                                      const KernelSpec& spec,
                                      const Eigen::VectorXd& x0,
                                      std::uint64_t burn_in,
                                      std::uint64_t length,
                                      std::uint64_t base_seed,
                                      std::uint32_t replicas,
                                      unsigned threads) {
  if (replicas < 1) throw ParameterError("replicas must be >= 1");
  std::vector<ChainOutput> out(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    try {
      out[r] = run_chain(potential, spec, x0, burn_in, length,
                         replica_seed(base_seed, r));
    } catch (const DivergenceError& e) {
      throw DivergenceError("replica " + std::to_string(r) + ": " + e.what(),
                            e.step(), static_cast<std::ptrdiff_t>(r));
    }
  });
  return out;
}

MonteCarloEstimate rwm_pullback_mc(const Potential& potential, double gamma,
                                   const std::function<double(double)>& f,
                                   double x, std::uint64_t pairs,
                                   std::uint64_t seed) {
  if (potential.dim() != 1) throw ShapeError("rwm_pullback_mc is 1D only");
  if (pairs < 2) throw ParameterError("rwm_pullback_mc needs >= 2 pairs");
  Rng rng(seed);
  const Eigen::VectorXd at = Eigen::VectorXd::Constant(1, x);
  const double ux = potential.u(at);
  const double fx = f(x);
  const double scale = std::sqrt(2.0 * gamma);
  Eigen::VectorXd y(1);
  // Welford accumulation of the per-pair increment.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t k = 0; k < pairs; ++k) {
    const double h = scale * rng.normal();
    double pair = 0.0;
    for (double sign : {1.0, -1.0}) {
      y[0] = x + sign * h;
      const double alpha = std::min(1.0, std::exp(ux - potential.u(y)));
      pair += 0.5 * alpha * (f(y[0]) - fx);
    }
    const double delta = pair - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (pair - mean);
  }
  const double var = m2 / static_cast<double>(pairs - 1);
  return {fx + mean, std::sqrt(var / static_cast<double>(pairs))};
}

}  // namespace lcv
