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

// lcv: sampling, control-variate fitting and variance estimation from the
// command line. Run `lcv --help` for the command list.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcv/cv.hpp"
#include "lcv/errors.hpp"
#include "lcv/experiment.hpp"
#include "lcv/oracle1d.hpp"
#include "lcv/samplers.hpp"

namespace {

using nlohmann::json;

// Values given on the command line; unset ones leave the configuration alone.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma;
  std::optional<std::uint64_t> burn_in;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint32_t> replicas;
  std::optional<std::string> basis;
  std::optional<std::string> data;
  std::optional<std::string> label_column;
  bool intercept = false;
  bool split_fit = false;
  std::optional<std::string> out;
  std::vector<std::string> algorithms;
  std::optional<std::string> theta_source;
  std::optional<double> boundary;
  std::optional<int> dim;
  unsigned threads = 0;
  std::string target = "mixture1d";
  std::string preset;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON file with flat configuration keys")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--gamma", o.gamma, "Step size for every selected algorithm");
  cmd->add_option("--burn-in", o.burn_in, "Discarded steps before recording");
  cmd->add_option("--samples", o.samples, "Recorded samples per chain");
  cmd->add_option("--replicas", o.replicas, "Independent chains per algorithm");
  cmd->add_option("--basis", o.basis,
                  "first, second or gaussian_kernels(p,lo,hi); join several with '+'");
  cmd->add_option("--data", o.data, "Regression CSV or synthetic(rows,dim,seed)");
  cmd->add_option("--label-column", o.label_column, "Label column of the CSV");
  cmd->add_flag("--intercept", o.intercept, "Prepend a constant predictor");
  cmd->add_flag("--split-fit", o.split_fit, "Fit coefficients on an independent chain");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--algorithm", o.algorithms, "ULA, MALA or RWM (repeatable)")
      ->delimiter(',');
  cmd->add_option("--theta-source", o.theta_source, "fitted or oracle");
  cmd->add_option("--boundary", o.boundary, "Oracle integration boundary a");
  cmd->add_option("--dim", o.dim, "Dimension of the Gaussian target");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

lcv::Preset target_preset(const std::string& target) {
  if (target == "gaussian") return lcv::Preset::gaussian_sanity;
  const lcv::Preset p = lcv::parse_preset(target);
  if (p == lcv::Preset::oracle_sweep) {
    throw lcv::ParameterError("--target must be mixture1d, gaussian, logistic or probit");
  }
  return p;
}

lcv::ExperimentConfig build_config(lcv::Preset preset, const Overrides& o) {
  lcv::ExperimentConfig c = lcv::preset_config(preset);
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw lcv::ParameterError("cannot parse '" + o.config_path + "': " + e.what());
    }
    // The preset named on the command line wins over one in the file.
    j.erase("preset");
    c = lcv::config_from_json(j, c);
  }
  if (!o.algorithms.empty()) {
    c.algorithms.clear();
    for (const std::string& a : o.algorithms) c.algorithms.push_back(lcv::parse_algorithm(a));
  }
  if (o.gamma) {
    for (lcv::Algorithm a : c.algorithms) c.set_gamma(a, *o.gamma);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.burn_in) c.burn_in = *o.burn_in;
  if (o.samples) c.samples = *o.samples;
  if (o.replicas) c.replicas = *o.replicas;
  if (o.basis) c.bases = lcv::split_basis_list(*o.basis);
  if (o.data) c.data = *o.data;
  if (o.label_column) c.label_column = *o.label_column;
  if (o.intercept) c.intercept = true;
  if (o.split_fit) c.split_fit = true;
  if (o.out) c.output_dir = *o.out;
  if (o.theta_source) c.theta_source = lcv::parse_theta_source(*o.theta_source);
  if (o.boundary) c.oracle_boundary = *o.boundary;
  if (o.dim) c.dim = *o.dim;
  c.validate();
  return c;
}

std::filesystem::path prepare_dir(const lcv::ExperimentConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) throw lcv::IoError("cannot create '" + c.output_dir.string() + "': " + ec.message());
  return c.output_dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw lcv::IoError("cannot write '" + path.string() + "'");
  std::cout << "wrote " << path.string() << "\n";
}

lcv::ChainOutput single_chain(const lcv::ExperimentConfig& c, const lcv::Problem& problem) {
  const lcv::Algorithm a = c.algorithms.front();
  return lcv::run_chain(problem.potential, lcv::KernelSpec{a, c.gamma(a)}, problem.x0,
                        c.burn_in, c.samples, c.seed);
}

int cmd_sample(const Overrides& o) {
  const lcv::ExperimentConfig c = build_config(target_preset(o.target), o);
  const lcv::Problem problem = lcv::make_problem(c);
  const lcv::ChainOutput chain = single_chain(c, problem);
  std::string csv;
  for (Eigen::Index j = 0; j < chain.samples.cols(); ++j) {
    csv += (j ? ",x" : "x") + std::to_string(j + 1);
  }
  csv += "\n";
  for (Eigen::Index i = 0; i < chain.samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < chain.samples.cols(); ++j) {
      csv += (j ? "," : "") + lcv::format_double(chain.samples(i, j));
    }
    csv += "\n";
  }
  const auto dir = prepare_dir(c);
  write_text(dir / "chain.csv", csv);
  std::cout << lcv::to_string(chain.spec.algorithm) << " gamma=" << chain.spec.gamma
            << " acceptance=" << chain.acceptance_rate() << "\n";
  return 0;
}

int cmd_fit(const Overrides& o) {
  const lcv::ExperimentConfig c = build_config(target_preset(o.target), o);
  const lcv::Problem problem = lcv::make_problem(c);
  const lcv::ChainOutput chain = single_chain(c, problem);
  const lcv::SampleMatrix grads = lcv::gradient_table(chain, problem.potential);
  std::vector<lcv::TestFunction> fs;
  for (const auto& nf : problem.functions) fs.push_back(nf.f);

  json fits = json::array();
  for (const std::string& spec : c.bases) {
    const lcv::ControlBasis basis = lcv::parse_basis(spec, problem.potential.dim());
    const lcv::BatchMoments bm = lcv::batch_moments(chain, grads, basis, fs);
    for (std::size_t k = 0; k < fs.size(); ++k) {
      for (const lcv::Moments& m : {bm.cv(k), bm.zv(k)}) {
        const lcv::CvFit f = lcv::fit(m);
        json theta = json::array();
        for (Eigen::Index i = 0; i < f.theta.size(); ++i) theta.push_back(f.theta[i]);
        fits.push_back(json{{"function", problem.functions[k].name},
                            {"method", lcv::to_string(f.method)},
                            {"basis", spec},
                            {"basis_members", basis.describe()},
                            {"m", f.m},
                            {"sample_mean_f", f.sample_mean_f},
                            {"theta", theta}});
      }
    }
  }
  json doc{{"config", lcv::config_to_json(c)},
           {"algorithm", lcv::to_string(chain.spec.algorithm)},
           {"acceptance_rate", chain.acceptance_rate()},
           {"fits", fits}};
  write_text(prepare_dir(c) / "fit.json", doc.dump(2) + "\n");
  return 0;
}

int run_and_emit(const lcv::ExperimentConfig& c, unsigned threads) {
  const lcv::ExperimentResult result = lcv::run_experiment(c, threads);
  for (const auto& path : lcv::emit_results(result, c.output_dir, lcv::utc_timestamp())) {
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

int cmd_estimate(const Overrides& o) {
  Overrides single = o;
  if (!single.replicas) single.replicas = 1;
  return run_and_emit(build_config(target_preset(o.target), single), o.threads);
}

int cmd_experiment(const Overrides& o) {
  return run_and_emit(build_config(lcv::parse_preset(o.preset), o), o.threads);
}

int cmd_oracle(const Overrides& o) {
  const lcv::Preset preset = target_preset(o.target);
  if (preset != lcv::Preset::mixture1d && preset != lcv::Preset::gaussian_sanity) {
    throw lcv::ParameterError("oracle1d needs a one-dimensional target");
  }
  const lcv::ExperimentConfig c = build_config(preset, o);
  if (c.dim != 1) throw lcv::ParameterError("oracle1d needs --dim 1");
  const lcv::Problem problem = lcv::make_problem(c);
  const lcv::ScalarFunction f = [&problem](double x) {
    return problem.functions.front().f(Eigen::VectorXd::Constant(1, x));
  };
  json reports = json::array();
  for (const std::string& spec : c.bases) {
    const lcv::OracleReport r =
        lcv::oracle_report(problem.potential, lcv::parse_basis(spec, 1), f, c.oracle_boundary);
    json j = lcv::oracle_to_json(r);
    j["basis"] = spec;
    reports.push_back(std::move(j));
  }
  write_text(prepare_dir(c) / "oracle.json", reports.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Langevin-based control variates for MCMC variance reduction"};
  app.require_subcommand(1);
  Overrides o;

  CLI::App* sample = app.add_subcommand("sample", "Run one chain and write its samples");
  CLI::App* fit = app.add_subcommand("fit", "Fit CV and ZV coefficients on one chain");
  CLI::App* estimate =
      app.add_subcommand("estimate", "Plain, CV and ZV estimates with asymptotic variances");
  CLI::App* oracle =
      app.add_subcommand("oracle1d", "Quadrature oracle for a one-dimensional target");
  CLI::App* experiment = app.add_subcommand("experiment", "Run an experiment preset");
  for (CLI::App* cmd : {sample, fit, estimate, oracle, experiment}) add_common(cmd, o);
  for (CLI::App* cmd : {sample, fit, estimate, oracle}) {
    cmd->add_option("--target", o.target, "mixture1d, gaussian, logistic or probit");
  }
  experiment
      ->add_option("preset", o.preset,
                   "mixture1d, logistic, probit, gaussian_sanity or oracle_sweep")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sample) return cmd_sample(o);
    if (*fit) return cmd_fit(o);
    if (*estimate) return cmd_estimate(o);
    if (*oracle) return cmd_oracle(o);
    return cmd_experiment(o);
  } catch (const lcv::IngestionError& e) {
    std::cerr << "lcv: data error (row " << e.row() << "): " << e.what() << "\n";
    return lcv::exit_code(e);
  } catch (const lcv::DivergenceError& e) {
    std::cerr << "lcv: divergence";
    if (e.replica() >= 0) std::cerr << " in replica " << e.replica();
    std::cerr << " at step " << e.step() << ": " << e.what() << "\n";
    return lcv::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "lcv: " << e.what() << "\n";
    return lcv::exit_code(e);
  }
}
