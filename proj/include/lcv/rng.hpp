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

#ifndef LCV_RNG_HPP_
#define LCV_RNG_HPP_

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace lcv {

// One round of the splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

// Seed of replica `index` under `base_seed`.
inline std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t index) {
  return base_seed ^ splitmix64(index);
}

// Seeded source of standard normal and uniform(0,1) draws. The engine is
// initialised from splitmix64(seed) so that adjacent seeds give unrelated
// streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double normal() { return normal_(engine_); }

  // Uniform on [0, 1).
  double uniform() {
    double u;
    do {
      u = uniform_(engine_);
    } while (u >= 1.0);
    return u;
  }

  void fill_normal(Eigen::Ref<Eigen::VectorXd> z) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal();
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace lcv

#endif  // LCV_RNG_HPP_
