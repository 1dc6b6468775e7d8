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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lcv/errors.hpp"
#include "lcv/experiment.hpp"

using namespace lcv;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lcv_test_experiment_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_mixture() {
  ExperimentConfig c = preset_config(Preset::mixture1d);
  c.burn_in = 1000;
  c.samples = 20000;
  c.replicas = 4;
  c.seed = 11;
  return c;
}

ExperimentConfig small_logistic() {
  ExperimentConfig c = preset_config(Preset::logistic);
  c.data = "synthetic(40,2,3)";
  c.burn_in = 500;
  c.samples = 4000;
  c.replicas = 3;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("preset defaults follow the documented experimental settings") {
  const ExperimentConfig m = preset_config(Preset::mixture1d);
  CHECK(m.gamma_ula == 1e-2);
  CHECK(m.gamma_mala == 5e-2);
  CHECK(m.gamma_rwm == 5e-2);
  CHECK(m.burn_in == 100000);
  CHECK(m.samples == 1000000);
  CHECK(m.replicas == 10);
  CHECK(m.bases == std::vector<std::string>{"gaussian_kernels(4,-4,4)"});
  CHECK(m.algorithms.size() == 3);

  const ExperimentConfig l = preset_config(Preset::logistic);
  CHECK(l.replicas == 100);
  CHECK(l.prior_variance == 100.0);
  CHECK(l.bases == std::vector<std::string>{"first", "second"});
  CHECK(l.theta_source == ThetaSource::fitted);

  for (Preset p : {Preset::mixture1d, Preset::logistic, Preset::probit,
                   Preset::gaussian_sanity, Preset::oracle_sweep}) {
    CHECK(parse_preset(to_string(p)) == p);
    CHECK_NOTHROW(preset_config(p).validate());
  }
  CHECK_THROWS_AS(parse_preset("table"), ParameterError);
}

TEST_CASE("configuration validation") {
  ExperimentConfig c = preset_config(Preset::mixture1d);
  c.samples = 3;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = preset_config(Preset::mixture1d);
  c.gamma_rwm = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = preset_config(Preset::mixture1d);
  c.algorithms = {Algorithm::ULA, Algorithm::ULA};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = preset_config(Preset::mixture1d);
  c.bases = {"cubic"};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = preset_config(Preset::logistic);
  c.theta_source = ThetaSource::oracle;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = preset_config(Preset::mixture1d);
  c.replicas = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("configuration JSON round trip and echo") {
  ExperimentConfig c = preset_config(Preset::probit);
  c.algorithms = {Algorithm::RWM, Algorithm::ULA};
  c.gamma_ula = 3e-3;
  c.seed = 0xfeedbeefULL;
  c.bases = {"first", "gaussian_kernels(3,-2,2)"};
  c.data = "synthetic(50,3,9)";
  c.split_fit = true;
  c.intercept = true;
  c.boundaries = {2.5, 7.0};

  const json echo = config_to_json(c);
  const ExperimentConfig back = config_from_json(echo, preset_config(Preset::mixture1d));
  CHECK(back == c);
  CHECK(config_to_json(back) == echo);
  CHECK(echo.at("basis") == "first+gaussian_kernels(3,-2,2)");
  CHECK(echo.at("algorithms") == json::array({"RWM", "ULA"}));
  CHECK_FALSE(echo.contains("output_dir"));

  CHECK_THROWS_AS(config_from_json(json{{"samplez", 10}}, c), ParameterError);
  CHECK_THROWS_AS(config_from_json(json{{"samples", "many"}}, c), ParameterError);
  CHECK_THROWS_AS(config_from_json(json::array(), c), ParameterError);

  const ExperimentConfig g = config_from_json(json{{"gamma", 0.2}, {"algorithms", "mala,rwm"}}, c);
  CHECK(g.gamma_ula == 0.2);
  CHECK(g.gamma_rwm == 0.2);
  CHECK(g.algorithms == std::vector<Algorithm>{Algorithm::MALA, Algorithm::RWM});
}

TEST_CASE("basis and data specifications") {
  CHECK(parse_basis("first", 3).count() == 3);
  CHECK(parse_basis(" Second ", 3).count() == 9);
  CHECK(parse_basis("gaussian_kernels(4,-4,4)", 1).count() == 4);
  CHECK(parse_basis("gaussian_kernels( 5 , -4 , 4 )", 1).count() == 5);
  CHECK_THROWS_AS(parse_basis("gaussian_kernels(4,-4)", 1), ParameterError);
  CHECK_THROWS_AS(parse_basis("gaussian_kernels(4,-4,4)", 2), ParameterError);
  CHECK_THROWS_AS(parse_basis("gaussian_kernels(x,-4,4)", 1), ParameterError);
  CHECK_THROWS_AS(parse_basis("gaussian_kernels(0,-4,4)", 1), ParameterError);
  CHECK_THROWS_AS(parse_basis("third", 1), ParameterError);

  CHECK(split_basis_list("first+gaussian_kernels(2,-1,1)+second") ==
        std::vector<std::string>{"first", "gaussian_kernels(2,-1,1)", "second"});
  CHECK(split_basis_list("gaussian_kernels(2,-1,+1)") ==
        std::vector<std::string>{"gaussian_kernels(2,-1,+1)"});
  CHECK_THROWS_AS(split_basis_list("first++second"), ParameterError);
  CHECK(join_basis_list(split_basis_list("first+second")) == "first+second");

  SyntheticSpec s;
  CHECK(parse_synthetic("synthetic(100,4,1)", &s));
  CHECK(s.rows == 100);
  CHECK(s.dim == 4);
  CHECK(s.seed == 1);
  CHECK_FALSE(parse_synthetic("data/heart.csv", &s));
  CHECK_THROWS_AS(parse_synthetic("synthetic(100,4)", &s), ParameterError);
}

TEST_CASE("result row JSON round trip keeps non-finite values") {
  ResultRow r{"MALA", 0.05, "x1^2", "ZV", "second", 20, -1.25, 0.5, 3e-7, 1e-8,
              std::nan(""), 12.5};
  const json j = r;
  CHECK(j.at("vrf").is_null());
  const ResultRow back = j.get<ResultRow>();
  CHECK(std::isnan(back.vrf));
  ResultRow a = r, b = back;
  a.vrf = b.vrf = 1.0;
  CHECK(a == b);

  r.vrf = 7.0;
  CHECK(json::parse(json(r).dump()).get<ResultRow>() == r);
}

TEST_CASE("CSV emission") {
  const ResultRow r{"ULA", 0.01, "f", "CV", "gaussian_kernels(4,-4,4)", 10, 0.1, 0.2, 5.3,
                    0.3, 15.5, 15.1};
  const std::string csv = results_csv({r});
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.find("\"gaussian_kernels(4,-4,4)\"") != std::string::npos);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(std::count(header.begin(), header.end(), ',') == 11);
  CHECK(csv.find("ULA,0.01,f,CV,") != std::string::npos);

  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-HUGE_VAL) == "-inf");
}

TEST_CASE("aggregates are consistent with the per-replica detail") {
  const ExperimentResult res = run_experiment(small_mixture(), 1);
  REQUIRE(res.rows.size() == 9);
  REQUIRE(res.replicas.size() == 12);
  REQUIRE(res.oracle.size() == 1);
  CHECK(res.autocov.size() == 9);
  for (const AutocovSeries& s : res.autocov) CHECK(s.omega.size() == 100);

  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const ResultRow& row = res.rows[i];
    const ResultRow& plain = res.rows[i - i % 3];
    CHECK(plain.method == "plain");
    CHECK(row.method == std::vector<std::string>{"plain", "CV", "ZV"}[i % 3]);
    CHECK(std::abs(row.vrf - plain.gamma_sigma2_mean / row.gamma_sigma2_mean) <=
          1e-12 * row.vrf);

    std::vector<double> est, gs2;
    for (const ReplicaResult& rep : res.replicas) {
      if (to_string(rep.algorithm) != row.algorithm) continue;
      const ReplicaEntry& e = rep.entries[i % 3];
      CHECK(e.method == row.method);
      CHECK(e.gamma_sigma2 == doctest::Approx(rep.gamma * e.sigma2).epsilon(1e-15));
      CHECK(e.vrf == doctest::Approx(rep.entries[0].sigma2 / e.sigma2).epsilon(1e-12));
      est.push_back(e.estimate);
      gs2.push_back(e.gamma_sigma2);
    }
    REQUIRE(est.size() == 4);
    double mean = 0.0, ss = 0.0;
    for (double v : est) mean += v / 4.0;
    for (double v : est) ss += (v - mean) * (v - mean);
    CHECK(row.estimate_mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(row.estimate_sd == doctest::Approx(std::sqrt(ss / 3.0)).epsilon(1e-10));
  }
  // Oracle coefficients are shared by every replica.
  CHECK(res.replicas[0].entries[1].theta == res.oracle[0].theta_star);
  CHECK(res.replicas[7].entries[2].theta == res.oracle[0].theta_zv);
}

TEST_CASE("exact control variate on the gaussian target") {
  ExperimentConfig c = preset_config(Preset::gaussian_sanity);
  c.replicas = 3;
  const ExperimentResult res = run_experiment(c, 1);
  for (const ReplicaResult& rep : res.replicas) {
    for (const ReplicaEntry& e : rep.entries) {
      if (e.method == "CV") CHECK(std::abs(e.estimate) < 1e-3);
    }
  }
}

TEST_CASE("results do not depend on the worker count") {
  for (const ExperimentConfig& c : {small_mixture(), small_logistic()}) {
    const std::string serial = results_json(run_experiment(c, 1), "t").dump();
    const std::string threaded = results_json(run_experiment(c, 3), "t").dump();
    CHECK(serial == threaded);
  }
}

TEST_CASE("split fitting uses an independent chain") {
  ExperimentConfig c = small_logistic();
  c.replicas = 1;
  const ExperimentResult same = run_experiment(c, 1);
  c.split_fit = true;
  const ExperimentResult split = run_experiment(c, 1);
  CHECK(split.replicas[0].fit_seed != split.replicas[0].seed);
  CHECK(same.replicas[0].fit_seed == same.replicas[0].seed);
  // Plain entries see the same chain; fitted coefficients differ.
  CHECK(split.replicas[0].entries[0].estimate == same.replicas[0].entries[0].estimate);
  CHECK(split.replicas[0].entries.back().theta != same.replicas[0].entries.back().theta);
}

TEST_CASE("emitted files") {
  const ExperimentResult res = run_experiment(small_mixture(), 1);
  const auto dir = scratch("emit");
  const auto files = emit_results(res, dir, "2026-01-01T00:00:00Z");
  CHECK(files.size() == 4);
  for (const char* name : {"results.csv", "results.json", "oracle.json", "autocov.csv"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  const json doc = json::parse(slurp(dir / "results.json"));
  CHECK(doc.at("timestamp") == "2026-01-01T00:00:00Z");
  CHECK(doc.at("config") == config_to_json(res.config));
  CHECK(doc.at("rows").get<std::vector<ResultRow>>() == res.rows);
  CHECK(doc.at("replicas").size() == res.replicas.size());
  CHECK(doc.at("replicas")[1].at("seed") == res.replicas[1].seed);
  CHECK(slurp(dir / "results.csv") == results_csv(res.rows));
  const std::string autocov = slurp(dir / "autocov.csv");
  CHECK(std::count(autocov.begin(), autocov.end(), '\n') == 1 + 9 * 100);

  // A regular file where the directory should go.
  const auto blocked = scratch("blocked");
  std::ofstream(blocked) << "x";
  CHECK_THROWS_AS(emit_results(res, blocked / "sub", "t"), IoError);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(blocked);

  ExperimentResult empty = res;
  empty.rows.clear();
  CHECK_THROWS_AS(emit_results(empty, scratch("empty"), "t"), DataError);
}

TEST_CASE("oracle sweep emits the truncation table") {
  const ExperimentResult res = run_experiment(preset_config(Preset::oracle_sweep), 1);
  REQUIRE(res.oracle.size() == 4);
  CHECK(res.oracle[0].sigma2_f == doctest::Approx(89.28).epsilon(0.05 / 89.28));
  const auto dir = scratch("sweep");
  emit_results(res, dir, "t");
  const std::string csv = slurp(dir / "truncation.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("divergence carries the replica index") {
  ExperimentConfig c = preset_config(Preset::gaussian_sanity);
  c.algorithms = {Algorithm::ULA};
  c.gamma_ula = 5.0;
  c.burn_in = 0;
  c.samples = 2000;
  c.replicas = 2;
  try {
    run_experiment(c, 1);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.replica() == 0);
    CHECK(std::string(e.what()).find("replica 0") != std::string::npos);
  }
}

TEST_CASE("timestamps honour SOURCE_DATE_EPOCH") {
  setenv("SOURCE_DATE_EPOCH", "86400", 1);
  CHECK(utc_timestamp() == "1970-01-02T00:00:00Z");
  unsetenv("SOURCE_DATE_EPOCH");
  CHECK(utc_timestamp().size() == 20);
}
