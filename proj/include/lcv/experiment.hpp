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

#ifndef LCV_EXPERIMENT_HPP_
#define LCV_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "lcv/bases.hpp"
#include "lcv/cv.hpp"
#include "lcv/oracle1d.hpp"
#include "lcv/potentials.hpp"
#include "lcv/samplers.hpp"

namespace lcv {

enum class Preset { mixture1d, logistic, probit, gaussian_sanity, oracle_sweep };

std::string to_string(Preset p);
Preset parse_preset(const std::string& name);

// Where CV/ZV coefficients come from: fitted on a chain, or the quadrature
// optimum (1D targets only).
enum class ThetaSource { fitted, oracle };

std::string to_string(ThetaSource s);
ThetaSource parse_theta_source(const std::string& name);

struct ExperimentConfig {
  Preset preset = Preset::mixture1d;
  std::vector<Algorithm> algorithms{Algorithm::ULA, Algorithm::MALA, Algorithm::RWM};
  double gamma_ula = 1e-2;
  double gamma_mala = 5e-2;
  double gamma_rwm = 5e-2;
  std::uint64_t burn_in = 100000;
  std::uint64_t samples = 1000000;
  std::uint32_t replicas = 10;
  std::uint64_t seed = 1;
  std::vector<std::string> bases{"gaussian_kernels(4,-4,4)"};
  // CSV path or "synthetic(rows,dim,seed)"; regression presets only.
  std::string data = "synthetic(100,4,1)";
  std::string label_column = "y";
  bool intercept = false;
  double prior_variance = 100.0;
  bool split_fit = false;
  ThetaSource theta_source = ThetaSource::fitted;
  double oracle_boundary = 5.0;
  std::vector<double> boundaries{3.0, 4.0, 5.0, 6.0};
  int dim = 1;  // gaussian_sanity target dimension
  std::uint32_t autocov_lags = 100;
  std::filesystem::path output_dir = "results";

  double gamma(Algorithm a) const;
  void set_gamma(Algorithm a, double value);
  // Throws ParameterError on any invalid field.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig preset_config(Preset p);

// Flat-key JSON. The echo leaves out output_dir, which only says where files
// go; config_from_json starts from `base` and overrides the keys present.
// Unknown keys are a ParameterError.
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base);

// "first", "second" or "gaussian_kernels(p,lo,hi)".
ControlBasis parse_basis(const std::string& spec, int dim);
// Splits "first+second" at top-level '+' signs.
std::vector<std::string> split_basis_list(const std::string& specs);
std::string join_basis_list(const std::vector<std::string>& specs);

struct SyntheticSpec {
  int rows = 100;
  int dim = 4;
  std::uint64_t seed = 1;
};
// Parses "synthetic(rows,dim,seed)"; false for anything else.
bool parse_synthetic(const std::string& text, SyntheticSpec* out);

struct NamedFunction {
  std::string name;
  TestFunction f;
};

struct Problem {
  Potential potential;
  std::vector<NamedFunction> functions;
  Eigen::VectorXd x0;
};

// Target, test functions and start point for a sampling preset:
//   mixture1d        f(x) = x + x^3/2 + 3 sin x, start 0
//   gaussian_sanity  N(0, I_dim), f(x) = x_1, start 0
//   logistic/probit  f_k = x_k, f_{k+d} = x_k^2, start at the posterior mode
Problem make_problem(const ExperimentConfig& c);

struct ReplicaEntry {
  std::string function;
  std::string method;  // "plain", "CV" or "ZV"
  std::string basis;   // "-" for plain
  double estimate = 0.0;
  double sigma2 = 0.0;
  double gamma_sigma2 = 0.0;
  double vrf = 1.0;  // sigma2(plain) / sigma2
  Eigen::VectorXd theta;
};

struct ReplicaResult {
  Algorithm algorithm = Algorithm::ULA;
  double gamma = 0.0;
  std::uint32_t replica = 0;
  std::uint64_t seed = 0;
  std::uint64_t fit_seed = 0;  // equals seed unless split_fit
  std::uint64_t accepted = 0;
  double acceptance_rate = 0.0;
  std::vector<ReplicaEntry> entries;
};

// One (algorithm, function, method, basis) cell aggregated over replicas.
// vrf = gamma_sigma2_mean(plain) / gamma_sigma2_mean; vrf_median is the
// median of the per-replica ratios.
struct ResultRow {
  std::string algorithm;
  double gamma = 0.0;
  std::string function;
  std::string method;
  std::string basis;
  std::uint32_t replicas = 0;
  double estimate_mean = 0.0;
  double estimate_sd = 0.0;
  double gamma_sigma2_mean = 0.0;
  double gamma_sigma2_sd = 0.0;
  double vrf = 1.0;
  double vrf_median = 1.0;

  bool operator==(const ResultRow&) const = default;
};

void to_json(nlohmann::json& j, const ResultRow& r);
void from_json(const nlohmann::json& j, ResultRow& r);

struct AutocovSeries {
  std::string algorithm;
  std::string function;
  std::string method;
  std::string basis;
  Eigen::VectorXd omega;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::vector<ReplicaResult> replicas;
  std::vector<OracleReport> oracle;  // mixture1d: at oracle_boundary; sweep: one per boundary
  std::vector<AutocovSeries> autocov;  // mixture1d, replica 0 of each algorithm
};

// Replicas run on `threads` workers (0 = hardware concurrency); the result
// does not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& c, unsigned threads = 0);

nlohmann::json oracle_to_json(const OracleReport& r);
nlohmann::json results_json(const ExperimentResult& result, const std::string& timestamp);
std::string results_csv(const std::vector<ResultRow>& rows);

// Writes results.json plus, depending on the preset, results.csv,
// oracle.json, autocov.csv and truncation.csv. Returns the paths written.
std::vector<std::filesystem::path> emit_results(const ExperimentResult& result,
                                                const std::filesystem::path& dir,
                                                const std::string& timestamp);

// ISO-8601 UTC time, or the time given by SOURCE_DATE_EPOCH when set.
std::string utc_timestamp();

// %.17g, with "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double v);

}  // namespace lcv

#endif  // LCV_EXPERIMENT_HPP_
