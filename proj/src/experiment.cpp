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

#include "lcv/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "lcv/errors.hpp"
#include "lcv/parallel.hpp"
#include "lcv/rng.hpp"
#include "lcv/variance.hpp"

namespace lcv {

using nlohmann::json;

namespace {

const std::vector<std::pair<Preset, std::string>> kPresetNames{
    {Preset::mixture1d, "mixture1d"},
    {Preset::logistic, "logistic"},
    {Preset::probit, "probit"},
    {Preset::gaussian_sanity, "gaussian_sanity"},
    {Preset::oracle_sweep, "oracle_sweep"},
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParameterError(what + ": '" + text + "' is not a number");
  }
  return v;
}

long long to_integer(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParameterError(what + ": '" + text + "' is not an integer");
  }
  return v;
}

// Arguments of "name(a,b,c)", or nullopt when `text` has another shape.
std::optional<std::vector<std::string>> call_arguments(const std::string& text,
                                                       const std::string& name) {
  const std::string t = trim(text);
  if (t.rfind(name + "(", 0) != 0 || t.back() != ')') return std::nullopt;
  const std::string inner = t.substr(name.size() + 1, t.size() - name.size() - 2);
  std::vector<std::string> args;
  std::string field;
  std::istringstream in(inner);
  while (std::getline(in, field, ',')) args.push_back(trim(field));
  if (!inner.empty() && inner.back() == ',') args.emplace_back();
  return args;
}

double cubic_sine(double x) { return x + 0.5 * x * x * x + 3.0 * std::sin(x); }

bool is_one_dimensional(const ExperimentConfig& c) {
  return c.preset == Preset::mixture1d || c.preset == Preset::oracle_sweep ||
         (c.preset == Preset::gaussian_sanity && c.dim == 1);
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end(), [](double a, double b) {
    // NaN sorts last.
    if (std::isnan(a)) return false;
    if (std::isnan(b)) return true;
    return a < b;
  });
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double ratio(double plain, double other) {
  return other > 0.0 && plain > 0.0 ? plain / other : std::nan("");
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j, const char* key) {
  const json& v = j.at(key);
  return v.is_null() ? std::nan("") : v.get<double>();
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string to_string(Preset p) {
  for (const auto& [preset, name] : kPresetNames) {
    if (preset == p) return name;
  }
  return "unknown";
}

Preset parse_preset(const std::string& name) {
  const std::string key = lower(trim(name));
  for (const auto& [preset, n] : kPresetNames) {
    if (n == key) return preset;
  }
  throw ParameterError("unknown preset '" + name + "'");
}

std::string to_string(ThetaSource s) {
  return s == ThetaSource::oracle ? "oracle" : "fitted";
}

ThetaSource parse_theta_source(const std::string& name) {
  const std::string key = lower(trim(name));
  if (key == "oracle") return ThetaSource::oracle;
  if (key == "fitted") return ThetaSource::fitted;
  throw ParameterError("theta_source must be 'oracle' or 'fitted', got '" + name + "'");
}

double ExperimentConfig::gamma(Algorithm a) const {
  switch (a) {
    case Algorithm::ULA:
      return gamma_ula;
    case Algorithm::MALA:
      return gamma_mala;
    case Algorithm::RWM:
      return gamma_rwm;
  }
  return gamma_ula;
}

void ExperimentConfig::set_gamma(Algorithm a, double value) {
  switch (a) {
    case Algorithm::ULA:
      gamma_ula = value;
      break;
    case Algorithm::MALA:
      gamma_mala = value;
      break;
    case Algorithm::RWM:
      gamma_rwm = value;
      break;
  }
}

void ExperimentConfig::validate() const {
  if (algorithms.empty()) throw ParameterError("at least one algorithm is required");
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (algorithms[i] == algorithms[j]) {
        throw ParameterError("algorithm " + to_string(algorithms[i]) + " listed twice");
      }
    }
  }
  for (double g : {gamma_ula, gamma_mala, gamma_rwm}) {
    if (!(g > 0.0) || !std::isfinite(g)) throw ParameterError("gamma must be positive");
  }
  if (samples < 4) throw ParameterError("samples must be >= 4");
  if (replicas < 1) throw ParameterError("replicas must be >= 1");
  if (bases.empty()) throw ParameterError("at least one basis is required");
  for (const std::string& b : bases) parse_basis(b, 1);
  if (!(prior_variance > 0.0)) throw ParameterError("prior_variance must be positive");
  if (dim < 1) throw ParameterError("dim must be >= 1");
  if (autocov_lags < 1) throw ParameterError("autocov_lags must be >= 1");
  if (!(oracle_boundary > 0.0)) throw ParameterError("oracle_boundary must be positive");
  if (preset == Preset::oracle_sweep) {
    if (boundaries.empty()) throw ParameterError("boundaries must not be empty");
    for (double a : boundaries) {
      if (!(a > 0.0)) throw ParameterError("boundaries must be positive");
    }
  }
  if (theta_source == ThetaSource::oracle && !is_one_dimensional(*this)) {
    throw ParameterError("theta_source 'oracle' needs a one-dimensional target");
  }
  if (preset == Preset::logistic || preset == Preset::probit) {
    SyntheticSpec spec;
    if (data.empty()) throw ParameterError("regression presets need data");
    if (parse_synthetic(data, &spec) && (spec.rows < 1 || spec.dim < 1)) {
      throw ParameterError("synthetic data needs rows, dim >= 1");
    }
  }
}

ExperimentConfig preset_config(Preset p) {
  ExperimentConfig c;
  c.preset = p;
  switch (p) {
    case Preset::mixture1d:
      c.theta_source = ThetaSource::oracle;
      break;
    case Preset::logistic:
    case Preset::probit:
      c.bases = {"first", "second"};
      c.replicas = 100;
      break;
    case Preset::gaussian_sanity:
      c.algorithms = {Algorithm::MALA, Algorithm::RWM};
      c.gamma_mala = 0.5;
      c.gamma_rwm = 0.5;
      c.burn_in = 10000;
      c.samples = 100000;
      c.bases = {"first"};
      break;
    case Preset::oracle_sweep:
      c.bases = {"gaussian_kernels(5,-4,4)"};
      c.theta_source = ThetaSource::oracle;
      break;
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json algos = json::array();
  for (Algorithm a : c.algorithms) algos.push_back(to_string(a));
  return json{
      {"preset", to_string(c.preset)},
      {"algorithms", algos},
      {"gamma_ula", c.gamma_ula},
      {"gamma_mala", c.gamma_mala},
      {"gamma_rwm", c.gamma_rwm},
      {"burn_in", c.burn_in},
      {"samples", c.samples},
      {"replicas", c.replicas},
      {"seed", c.seed},
      {"basis", join_basis_list(c.bases)},
      {"data", c.data},
      {"label_column", c.label_column},
      {"intercept", c.intercept},
      {"prior_variance", c.prior_variance},
      {"split_fit", c.split_fit},
      {"theta_source", to_string(c.theta_source)},
      {"oracle_boundary", c.oracle_boundary},
      {"boundaries", c.boundaries},
      {"dim", c.dim},
      {"autocov_lags", c.autocov_lags},
  };
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ParameterError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "preset") {
        c.preset = parse_preset(value.get<std::string>());
      } else if (key == "algorithms" || key == "algorithm") {
        c.algorithms.clear();
        if (value.is_string()) {
          std::istringstream in(value.get<std::string>());
          std::string name;
          while (std::getline(in, name, ',')) c.algorithms.push_back(parse_algorithm(trim(name)));
        } else {
          for (const auto& a : value) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
        }
      } else if (key == "gamma") {
        const double g = value.get<double>();
        c.gamma_ula = c.gamma_mala = c.gamma_rwm = g;
      } else if (key == "gamma_ula") {
        c.gamma_ula = value.get<double>();
      } else if (key == "gamma_mala") {
        c.gamma_mala = value.get<double>();
      } else if (key == "gamma_rwm") {
        c.gamma_rwm = value.get<double>();
      } else if (key == "burn_in") {
        c.burn_in = value.get<std::uint64_t>();
      } else if (key == "samples") {
        c.samples = value.get<std::uint64_t>();
      } else if (key == "replicas") {
        c.replicas = value.get<std::uint32_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "basis" || key == "bases") {
        if (value.is_string()) {
          c.bases = split_basis_list(value.get<std::string>());
        } else {
          c.bases = value.get<std::vector<std::string>>();
        }
      } else if (key == "data") {
        c.data = value.get<std::string>();
      } else if (key == "label_column") {
        c.label_column = value.get<std::string>();
      } else if (key == "intercept") {
        c.intercept = value.get<bool>();
      } else if (key == "prior_variance") {
        c.prior_variance = value.get<double>();
      } else if (key == "split_fit") {
        c.split_fit = value.get<bool>();
      } else if (key == "theta_source") {
        c.theta_source = parse_theta_source(value.get<std::string>());
      } else if (key == "oracle_boundary") {
        c.oracle_boundary = value.get<double>();
      } else if (key == "boundaries") {
        c.boundaries = value.get<std::vector<double>>();
      } else if (key == "dim") {
        c.dim = value.get<int>();
      } else if (key == "autocov_lags") {
        c.autocov_lags = value.get<std::uint32_t>();
      } else if (key == "out" || key == "output_dir") {
        c.output_dir = value.get<std::string>();
      } else {
        throw ParameterError("unknown configuration key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ParameterError("configuration key '" + key + "': " + e.what());
    }
  }
  return c;
}

ControlBasis parse_basis(const std::string& spec, int dim) {
  const std::string t = lower(trim(spec));
  if (t == "first") return first_order_basis(dim);
  if (t == "second") return second_order_basis(dim);
  if (const auto args = call_arguments(t, "gaussian_kernels")) {
    if (args->size() != 3) {
      throw ParameterError("gaussian_kernels takes (p, lo, hi): '" + spec + "'");
    }
    if (dim != 1) throw ParameterError("gaussian_kernels needs a one-dimensional target");
    const long long p = to_integer((*args)[0], "gaussian_kernels p");
    if (p < 1 || p > 100000) throw ParameterError("gaussian_kernels: p out of range");
    return gaussian_kernel_basis_1d(static_cast<int>(p), to_double((*args)[1], "lo"),
                                    to_double((*args)[2], "hi"));
  }
  throw ParameterError("unknown basis '" + spec +
                       "' (expected first, second or gaussian_kernels(p,lo,hi))");
}

std::vector<std::string> split_basis_list(const std::string& specs) {
  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  for (char ch : specs) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == '+' && depth == 0) {
      out.push_back(trim(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  out.push_back(trim(current));
  for (const std::string& s : out) {
    if (s.empty()) throw ParameterError("empty entry in basis list '" + specs + "'");
  }
  return out;
}

std::string join_basis_list(const std::vector<std::string>& specs) {
  std::string out;
  for (std::size_t i = 0; i < specs.size(); ++i) out += (i ? "+" : "") + specs[i];
  return out;
}

bool parse_synthetic(const std::string& text, SyntheticSpec* out) {
  const auto args = call_arguments(lower(text), "synthetic");
  if (!args) return false;
  if (args->size() != 3) throw ParameterError("synthetic takes (rows, dim, seed)");
  SyntheticSpec spec;
  spec.rows = static_cast<int>(to_integer((*args)[0], "synthetic rows"));
  spec.dim = static_cast<int>(to_integer((*args)[1], "synthetic dim"));
  const long long seed = to_integer((*args)[2], "synthetic seed");
  if (seed < 0) throw ParameterError("synthetic seed must be non-negative");
  spec.seed = static_cast<std::uint64_t>(seed);
  if (out) *out = spec;
  return true;
}

Problem make_problem(const ExperimentConfig& c) {
  switch (c.preset) {
    case Preset::mixture1d:
    case Preset::oracle_sweep:
      return Problem{mixture1d_potential(-1.0, 1.0, 0.5),
                     {{"f", [](const Eigen::VectorXd& x) { return cubic_sine(x[0]); }}},
                     Eigen::VectorXd::Zero(1)};
    case Preset::gaussian_sanity:
      return Problem{gaussian_potential(c.dim, Eigen::MatrixXd::Identity(c.dim, c.dim)),
                     {{"x1", [](const Eigen::VectorXd& x) { return x[0]; }}},
                     Eigen::VectorXd::Zero(c.dim)};
    case Preset::logistic:
    case Preset::probit: {
      const LinkModel model =
          c.preset == Preset::logistic ? LinkModel::logistic : LinkModel::probit;
      SyntheticSpec spec;
      RegressionData data =
          parse_synthetic(c.data, &spec)
              ? synthetic_regression(spec.rows, spec.dim, spec.seed, model, c.prior_variance)
              : load_regression_csv(c.data, c.label_column, c.intercept, c.prior_variance);
      const int d = data.dim();
      Potential potential =
          model == LinkModel::logistic ? logistic_potential(data) : probit_potential(data);
      std::vector<NamedFunction> fs;
      for (int k = 0; k < d; ++k) {
        fs.push_back({"x" + std::to_string(k + 1),
                      [k](const Eigen::VectorXd& x) { return x[k]; }});
      }
      for (int k = 0; k < d; ++k) {
        fs.push_back({"x" + std::to_string(k + 1) + "^2",
                      [k](const Eigen::VectorXd& x) { return x[k] * x[k]; }});
      }
      Eigen::VectorXd mode = find_mode(potential, Eigen::VectorXd::Zero(d));
      return Problem{std::move(potential), std::move(fs), std::move(mode)};
    }
  }
  throw ParameterError("unsupported preset");
}

namespace {

struct TaskOutput {
  ReplicaResult result;
  std::vector<AutocovSeries> autocov;
};

// Coefficients for one basis: column k of cv / zv belongs to function k.
struct Coefficients {
  Eigen::MatrixXd cv;
  Eigen::MatrixXd zv;
};

Eigen::VectorXd leading_autocov(const SpectralEstimate& est,
                                const Eigen::VectorXd& series, std::uint32_t lags) {
  const Eigen::Index want = std::min<Eigen::Index>(lags, series.size());
  if (est.autocov.size() >= want) return est.autocov.head(want);
  return autocovariance(series, want - 1);
}

TaskOutput run_task(const ExperimentConfig& c, const Problem& problem,
                    const std::vector<ControlBasis>& bases,
                    const std::vector<std::optional<Coefficients>>& oracle_theta,
                    Algorithm algorithm, std::uint32_t replica) {
  TaskOutput out;
  ReplicaResult& res = out.result;
  res.algorithm = algorithm;
  res.gamma = c.gamma(algorithm);
  res.replica = replica;
  res.seed = replica_seed(c.seed, replica);
  res.fit_seed = c.split_fit ? splitmix64(res.seed) : res.seed;

  const KernelSpec spec{algorithm, res.gamma};
  ChainOutput chain;
  try {
    chain = run_chain(problem.potential, spec, problem.x0, c.burn_in, c.samples, res.seed);
  } catch (const DivergenceError& e) {
    throw DivergenceError(to_string(algorithm) + " replica " + std::to_string(replica) +
                              ": " + e.what(),
                          e.step(), static_cast<std::ptrdiff_t>(replica));
  }
  res.accepted = chain.accepted;
  res.acceptance_rate = chain.acceptance_rate();
  const SampleMatrix grads = gradient_table(chain, problem.potential);

  std::optional<ChainOutput> fit_chain;
  std::optional<SampleMatrix> fit_grads;
  const bool need_fit =
      std::any_of(oracle_theta.begin(), oracle_theta.end(),
                  [](const auto& t) { return !t.has_value(); });
  if (c.split_fit && need_fit) {
    fit_chain = run_chain(problem.potential, spec, problem.x0, c.burn_in, c.samples,
                          res.fit_seed);
    fit_grads = gradient_table(*fit_chain, problem.potential);
  }
  const ChainOutput& fc = fit_chain ? *fit_chain : chain;
  const SampleMatrix& fg = fit_grads ? *fit_grads : grads;

  std::vector<TestFunction> fs;
  for (const auto& nf : problem.functions) fs.push_back(nf.f);
  const auto f_count = static_cast<Eigen::Index>(fs.size());
  const bool keep_autocov = c.preset == Preset::mixture1d && replica == 0;

  std::vector<double> plain_sigma2(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const Eigen::VectorXd series = plain_series(chain, fs[k]);
    const SpectralEstimate est = spectral_variance(series);
    plain_sigma2[k] = est.sigma2;
    res.entries.push_back({problem.functions[k].name, "plain", "-", compensated_mean(series),
                           est.sigma2, res.gamma * est.sigma2, 1.0, Eigen::VectorXd()});
    if (keep_autocov) {
      out.autocov.push_back({to_string(algorithm), problem.functions[k].name, "plain", "-",
                             leading_autocov(est, series, c.autocov_lags)});
    }
  }

  for (std::size_t bi = 0; bi < bases.size(); ++bi) {
    const ControlBasis& basis = bases[bi];
    const Eigen::Index p = basis.count();
    Coefficients theta;
    if (oracle_theta[bi]) {
      theta = *oracle_theta[bi];
    } else {
      const BatchMoments bm = batch_moments(fc, fg, basis, fs);
      theta.cv.resize(p, f_count);
      theta.zv.resize(p, f_count);
      for (Eigen::Index k = 0; k < f_count; ++k) {
        theta.cv.col(k) = fit(bm.cv(static_cast<std::size_t>(k))).theta;
        theta.zv.col(k) = fit(bm.zv(static_cast<std::size_t>(k))).theta;
      }
    }
    // CV columns first, then ZV, in a single pass over the chain.
    Eigen::MatrixXd thetas(p, 2 * f_count);
    thetas << theta.cv, theta.zv;
    std::vector<TestFunction> doubled = fs;
    doubled.insert(doubled.end(), fs.begin(), fs.end());
    const Eigen::MatrixXd series = corrected_series_batch(chain, grads, basis, thetas, doubled);
    for (Eigen::Index k = 0; k < f_count; ++k) {
      for (int m = 0; m < 2; ++m) {
        const Eigen::Index col = k + m * f_count;
        const Eigen::VectorXd h = series.col(col);
        const SpectralEstimate est = spectral_variance(h);
        const std::string method = m == 0 ? "CV" : "ZV";
        res.entries.push_back({problem.functions[static_cast<std::size_t>(k)].name, method,
                               c.bases[bi], compensated_mean(h), est.sigma2,
                               res.gamma * est.sigma2,
                               ratio(plain_sigma2[static_cast<std::size_t>(k)], est.sigma2),
                               thetas.col(col)});
        if (keep_autocov) {
          out.autocov.push_back({to_string(algorithm),
                                 problem.functions[static_cast<std::size_t>(k)].name, method,
                                 c.bases[bi], leading_autocov(est, h, c.autocov_lags)});
        }
      }
    }
  }
  return out;
}

std::vector<ResultRow> aggregate(const std::vector<ReplicaResult>& replicas,
                                 std::size_t per_algorithm) {
  std::vector<ResultRow> rows;
  for (std::size_t start = 0; start < replicas.size(); start += per_algorithm) {
    const ReplicaResult& first = replicas[start];
    const std::size_t cells = first.entries.size();
    // Plain rows are always listed first for every function, so the plain
    // cell of a function is found by name.
    std::map<std::string, double> plain_mean;
    std::vector<ResultRow> block;
    for (std::size_t e = 0; e < cells; ++e) {
      std::vector<double> est, gs2, vrf;
      for (std::size_t r = start; r < start + per_algorithm; ++r) {
        const ReplicaEntry& entry = replicas[r].entries[e];
        est.push_back(entry.estimate);
        gs2.push_back(entry.gamma_sigma2);
        vrf.push_back(entry.vrf);
      }
      const double n = static_cast<double>(per_algorithm);
      ResultRow row;
      row.algorithm = to_string(first.algorithm);
      row.gamma = first.gamma;
      row.function = first.entries[e].function;
      row.method = first.entries[e].method;
      row.basis = first.entries[e].basis;
      row.replicas = static_cast<std::uint32_t>(per_algorithm);
      double acc = 0.0;
      for (double v : est) acc += v;
      row.estimate_mean = acc / n;
      row.estimate_sd = sample_sd(est, row.estimate_mean);
      acc = 0.0;
      for (double v : gs2) acc += v;
      row.gamma_sigma2_mean = acc / n;
      row.gamma_sigma2_sd = sample_sd(gs2, row.gamma_sigma2_mean);
      if (row.method == "plain") plain_mean[row.function] = row.gamma_sigma2_mean;
      row.vrf = ratio(plain_mean.at(row.function), row.gamma_sigma2_mean);
      row.vrf_median = median(vrf);
      block.push_back(std::move(row));
    }
    rows.insert(rows.end(), block.begin(), block.end());
  }
  return rows;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c, unsigned threads) {
  c.validate();
  ExperimentResult result;
  result.config = c;
  const Problem problem = make_problem(c);
  const int dim = problem.potential.dim();
  const ScalarFunction f1 = [&problem](double x) {
    return problem.functions.front().f(Eigen::VectorXd::Constant(1, x));
  };

  if (c.preset == Preset::oracle_sweep) {
    result.oracle = truncation_sweep(problem.potential, parse_basis(c.bases.front(), 1), f1,
                                     c.boundaries);
    return result;
  }

  std::vector<ControlBasis> bases;
  for (const std::string& spec : c.bases) bases.push_back(parse_basis(spec, dim));

  std::vector<std::optional<Coefficients>> oracle_theta(bases.size());
  if (dim == 1 && (c.theta_source == ThetaSource::oracle || c.preset == Preset::mixture1d)) {
    for (std::size_t bi = 0; bi < bases.size(); ++bi) {
      OracleReport report =
          oracle_report(problem.potential, bases[bi], f1, c.oracle_boundary);
      if (c.theta_source == ThetaSource::oracle) {
        oracle_theta[bi] = Coefficients{report.theta_star, report.theta_zv};
      }
      result.oracle.push_back(std::move(report));
    }
  }

  const std::size_t per_algorithm = c.replicas;
  const std::size_t tasks = c.algorithms.size() * per_algorithm;
  std::vector<TaskOutput> outputs(tasks);
  parallel_for(tasks, threads, [&](std::size_t i) {
    outputs[i] = run_task(c, problem, bases, oracle_theta, c.algorithms[i / per_algorithm],
                          static_cast<std::uint32_t>(i % per_algorithm));
  });
  for (TaskOutput& o : outputs) {
    result.replicas.push_back(std::move(o.result));
    for (AutocovSeries& s : o.autocov) result.autocov.push_back(std::move(s));
  }
  result.rows = aggregate(result.replicas, per_algorithm);
  return result;
}

void to_json(json& j, const ResultRow& r) {
  j = json{{"algorithm", r.algorithm},
           {"gamma", number(r.gamma)},
           {"function", r.function},
           {"method", r.method},
           {"basis", r.basis},
           {"replicas", r.replicas},
           {"estimate_mean", number(r.estimate_mean)},
           {"estimate_sd", number(r.estimate_sd)},
           {"gamma_sigma2_mean", number(r.gamma_sigma2_mean)},
           {"gamma_sigma2_sd", number(r.gamma_sigma2_sd)},
           {"vrf", number(r.vrf)},
           {"vrf_median", number(r.vrf_median)}};
}

void from_json(const json& j, ResultRow& r) {
  r.algorithm = j.at("algorithm").get<std::string>();
  r.gamma = read_number(j, "gamma");
  r.function = j.at("function").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.basis = j.at("basis").get<std::string>();
  r.replicas = j.at("replicas").get<std::uint32_t>();
  r.estimate_mean = read_number(j, "estimate_mean");
  r.estimate_sd = read_number(j, "estimate_sd");
  r.gamma_sigma2_mean = read_number(j, "gamma_sigma2_mean");
  r.gamma_sigma2_sd = read_number(j, "gamma_sigma2_sd");
  r.vrf = read_number(j, "vrf");
  r.vrf_median = read_number(j, "vrf_median");
}

json oracle_to_json(const OracleReport& r) {
  return json{{"a", r.a},
              {"mass", number(r.mass)},
              {"pi_f", number(r.pi_f)},
              {"sigma2_f", number(r.sigma2_f)},
              {"H", matrix_json(r.h)},
              {"b", vector_json(r.b)},
              {"H_zv", matrix_json(r.h_zv)},
              {"b_zv", vector_json(r.b_zv)},
              {"theta_star", vector_json(r.theta_star)},
              {"theta_zv", vector_json(r.theta_zv)},
              {"sigma2_cv", number(r.sigma2_cv)},
              {"sigma2_zv", number(r.sigma2_zv)},
              {"nodes", r.nodes},
              {"converged", r.converged},
              {"rank_deficient", r.rank_deficient}};
}

json results_json(const ExperimentResult& result, const std::string& timestamp) {
  json replicas = json::array();
  for (const ReplicaResult& r : result.replicas) {
    json entries = json::array();
    for (const ReplicaEntry& e : r.entries) {
      entries.push_back(json{{"function", e.function},
                             {"method", e.method},
                             {"basis", e.basis},
                             {"estimate", number(e.estimate)},
                             {"sigma2", number(e.sigma2)},
                             {"gamma_sigma2", number(e.gamma_sigma2)},
                             {"vrf", number(e.vrf)},
                             {"theta", vector_json(e.theta)}});
    }
    replicas.push_back(json{{"algorithm", to_string(r.algorithm)},
                            {"gamma", r.gamma},
                            {"replica", r.replica},
                            {"seed", r.seed},
                            {"fit_seed", r.fit_seed},
                            {"accepted", r.accepted},
                            {"acceptance_rate", number(r.acceptance_rate)},
                            {"entries", entries}});
  }
  json oracle = json::array();
  for (const OracleReport& r : result.oracle) oracle.push_back(oracle_to_json(r));
  return json{{"timestamp", timestamp},
              {"config", config_to_json(result.config)},
              {"rows", result.rows},
              {"replicas", replicas},
              {"oracle", oracle}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out =
      "algorithm,gamma,function,method,basis,replicas,estimate_mean,estimate_sd,"
      "gamma_sigma2_mean,gamma_sigma2_sd,vrf,vrf_median\n";
  for (const ResultRow& r : rows) {
    out += csv_field(r.algorithm) + "," + format_double(r.gamma) + "," + csv_field(r.function) +
           "," + csv_field(r.method) + "," + csv_field(r.basis) + "," +
           std::to_string(r.replicas) + "," + format_double(r.estimate_mean) + "," +
           format_double(r.estimate_sd) + "," + format_double(r.gamma_sigma2_mean) + "," +
           format_double(r.gamma_sigma2_sd) + "," + format_double(r.vrf) + "," +
           format_double(r.vrf_median) + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> emit_results(const ExperimentResult& result,
                                                const std::filesystem::path& dir,
                                                const std::string& timestamp) {
  const bool sweep = result.config.preset == Preset::oracle_sweep;
  if (!sweep && result.rows.empty()) throw DataError("no result rows to emit");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    written.push_back(dir / name);
  };

  if (!sweep) emit("results.csv", results_csv(result.rows));
  emit("results.json", results_json(result, timestamp).dump(2) + "\n");
  if (!result.oracle.empty() && !sweep) {
    json reports = json::array();
    for (const OracleReport& r : result.oracle) reports.push_back(oracle_to_json(r));
    emit("oracle.json", reports.dump(2) + "\n");
  }
  if (sweep) {
    std::string csv =
        "a,mass,pi_f,sigma2_f,theta_star_1,theta_zv_1,sigma2_cv,sigma2_zv,nodes,converged\n";
    for (const OracleReport& r : result.oracle) {
      csv += format_double(r.a) + "," + format_double(r.mass) + "," + format_double(r.pi_f) +
             "," + format_double(r.sigma2_f) + "," + format_double(r.theta_star[0]) + "," +
             format_double(r.theta_zv[0]) + "," + format_double(r.sigma2_cv) + "," +
             format_double(r.sigma2_zv) + "," + std::to_string(r.nodes) + "," +
             (r.converged ? "true" : "false") + "\n";
    }
    emit("truncation.csv", csv);
  }
  if (!result.autocov.empty()) {
    std::string csv = "algorithm,function,method,basis,lag,omega\n";
    for (const AutocovSeries& s : result.autocov) {
      for (Eigen::Index k = 0; k < s.omega.size(); ++k) {
        csv += csv_field(s.algorithm) + "," + csv_field(s.function) + "," + csv_field(s.method) +
               "," + csv_field(s.basis) + "," + std::to_string(k) + "," +
               format_double(s.omega[k]) + "\n";
      }
    }
    emit("autocov.csv", csv);
  }
  return written;
}

std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    long long v = 0;
    const std::string s(epoch);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace lcv
