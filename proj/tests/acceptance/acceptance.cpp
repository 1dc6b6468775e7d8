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

// Acceptance suite. Prints one PASS/FAIL line per criterion; `--only N`
// restricts the run to criterion N (repeatable). Exit status is nonzero when
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "lcv/bases.hpp"
#include "lcv/cv.hpp"
#include "lcv/experiment.hpp"
#include "lcv/oracle1d.hpp"
#include "lcv/potentials.hpp"
#include "lcv/rng.hpp"
#include "lcv/samplers.hpp"
#include "lcv/variance.hpp"

using namespace lcv;

namespace {

unsigned g_threads = 0;

struct Outcome {
  bool pass = true;

  // Records one sub-check and prints it indented under the criterion.
  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Outcome::check(bool ok, const char* fmt, ...) {
  pass = pass && ok;
  std::printf("    [%s] ", ok ? "ok" : "!!");
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
}

void note(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void note(const char* fmt, ...) {
  std::printf("    [--] ");
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double cubic_sine(double x) { return x + 0.5 * x * x * x + 3.0 * std::sin(x); }
double cubic_sine_d1(double x) { return 1.0 + 1.5 * x * x + 3.0 * std::cos(x); }
double cubic_sine_d2(double x) { return 3.0 * x - 3.0 * std::sin(x); }

Potential mixture() { return mixture1d_potential(-1.0, 1.0, 0.5); }

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / static_cast<double>(x.size());
    my += std::log(y[i]) / static_cast<double>(y.size());
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

const ResultRow* find_row(const std::vector<ResultRow>& rows, const std::string& algorithm,
                          const std::string& function, const std::string& method,
                          const std::string& basis) {
  for (const ResultRow& r : rows) {
    if (r.algorithm == algorithm && r.function == function && r.method == method &&
        (method == "plain" || r.basis == basis)) {
      return &r;
    }
  }
  return nullptr;
}

// 1 -------------------------------------------------------------------------

Outcome truncation_table() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> boundaries{3.0, 4.0, 5.0, 6.0};
  const std::vector<double> expected{89.28, 92.41, 92.45, 92.45};
  const auto reports = truncation_sweep(mixture(), gaussian_kernel_basis_1d(5, -4.0, 4.0),
                                        cubic_sine, boundaries);
  const double elapsed = seconds_since(t0);
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    const double s2 = reports[i].sigma2_f;
    out.check(std::abs(s2 - expected[i]) <= 0.05, "a=%g  sigma2_f=%.4f  want %.2f +- 0.05",
              boundaries[i], s2, expected[i]);
  }
  out.check(elapsed < 5.0, "runtime %.2f s < 5 s", elapsed);
  return out;
}

// 2 -------------------------------------------------------------------------

Outcome optimal_coefficients() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const OracleReport r5 =
      oracle_report(mixture(), gaussian_kernel_basis_1d(5, -4.0, 4.0), cubic_sine, 5.0);
  const OracleReport r4 =
      oracle_report(mixture(), gaussian_kernel_basis_1d(4, -4.0, 4.0), cubic_sine, 5.0);
  const double elapsed = seconds_since(t0);
  out.check(std::abs(r5.theta_star[0] + 34.42) <= 0.5,
            "p=5 kernels on [-4,4], a=5: theta*_1 = %.4f  want -34.42 +- 0.5", r5.theta_star[0]);
  out.check(std::abs(r5.theta_zv[0] + 28.56) <= 0.5,
            "p=5 kernels on [-4,4], a=5: theta_zv_1 = %.4f  want -28.56 +- 0.5",
            r5.theta_zv[0]);
  note("p=4 kernels, a=5: theta*_1 = %.4f, theta_zv_1 = %.4f (p=4 does not reproduce the "
       "reference column)",
       r4.theta_star[0], r4.theta_zv[0]);
  out.check(elapsed < 5.0, "runtime %.2f s < 5 s", elapsed);
  return out;
}

// 3 -------------------------------------------------------------------------

Outcome mixture_table() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = preset_config(Preset::mixture1d);
  const ExperimentResult res = run_experiment(c, g_threads);
  struct Want {
    const char* algorithm;
    double plain, zv, cv;
  };
  const Want wants[] = {{"ULA", 82.06, 20.74, 5.33},
                        {"MALA", 93.27, 23.40, 5.00},
                        {"RWM", 105.2, 28.19, 8.41}};
  const std::string basis = c.bases.front();
  for (const Want& w : wants) {
    const ResultRow* plain = find_row(res.rows, w.algorithm, "f", "plain", basis);
    const ResultRow* cv = find_row(res.rows, w.algorithm, "f", "CV", basis);
    const ResultRow* zv = find_row(res.rows, w.algorithm, "f", "ZV", basis);
    if (!plain || !cv || !zv) {
      out.check(false, "%s rows missing", w.algorithm);
      continue;
    }
    for (auto [name, row, want] : {std::tuple{"plain", plain, w.plain},
                                   std::tuple{"ZV", zv, w.zv}, std::tuple{"CV", cv, w.cv}}) {
      const double got = row->gamma_sigma2_mean;
      out.check(std::abs(got - want) <= 0.3 * want,
                "%-4s %-5s gamma*sigma2 = %8.3f (sd %.3f over %u)  want %.2f +- 30%%",
                w.algorithm, name, got, row->gamma_sigma2_sd, row->replicas, want);
    }
    out.check(cv->gamma_sigma2_mean < zv->gamma_sigma2_mean &&
                  zv->gamma_sigma2_mean < plain->gamma_sigma2_mean,
              "%-4s ordering CV < ZV < plain", w.algorithm);
  }
  note("N=%llu n=%llu R=%u, %.1f s", static_cast<unsigned long long>(c.burn_in),
       static_cast<unsigned long long>(c.samples), c.replicas, seconds_since(t0));
  return out;
}

// 4 -------------------------------------------------------------------------

Outcome exact_control_variate() {
  Outcome out;
  const ExperimentConfig c = preset_config(Preset::gaussian_sanity);
  const ExperimentResult res = run_experiment(c, g_threads);
  std::size_t count = 0;
  double worst = 0.0;
  for (const ReplicaResult& rep : res.replicas) {
    for (const ReplicaEntry& e : rep.entries) {
      if (e.method != "CV") continue;
      ++count;
      worst = std::max(worst, std::abs(e.estimate));
    }
  }
  out.check(count == c.replicas * c.algorithms.size(),
            "%zu fitted CV estimates (%u replicas per algorithm, n=%llu)", count, c.replicas,
            static_cast<unsigned long long>(c.samples));
  out.check(worst <= 1e-3, "max |CV estimate| = %.3g <= 1e-3", worst);

  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(1);
  const double analytic = sigma2_with_cv(2.0, h, b, Eigen::VectorXd::Ones(1));
  out.check(analytic == 0.0, "quadratic form at H=1, b=1, sigma2=2, theta*=1: %.17g",
            analytic);
  const Potential g = gaussian_potential(1, Eigen::MatrixXd::Identity(1, 1));
  const OracleReport r = oracle_report(g, first_order_basis(1), [](double x) { return x; }, 8.0);
  out.check(std::abs(r.sigma2_cv) <= 1e-9 && std::abs(r.theta_star[0] - 1.0) <= 1e-9,
            "quadrature oracle: theta* = %.12f, sigma2(f + L g_theta*) = %.3g", r.theta_star[0],
            r.sigma2_cv);
  return out;
}

// 5 -------------------------------------------------------------------------

Outcome generator_order() {
  Outcome out;
  const Potential mix = mixture();
  const auto lf = [&mix](double x) {
    return -mix.grad_u(v1(x))[0] * cubic_sine_d1(x) + cubic_sine_d2(x);
  };
  std::vector<double> gammas;
  for (int i = 0; i <= 8; ++i) gammas.push_back(std::pow(10.0, -3.0 + 2.0 * i / 8.0));

  // The RWM gamma^{3/2} coefficient is a pointwise function of U', U'', f', f''
  // that nearly cancels at some x (at x = 0.5 the gamma^2 term dominates the
  // whole range), so the RWM order is read from the pi-weighted L1 norm of the
  // residual over a Simpson grid on [-4, 4].
  const QuadratureGrid grid = make_grid(4.0, 41);
  const ScalarFunction density = density_function(mix, 4.0);
  Eigen::VectorXd weight(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    weight[j] = grid.weights[j] * density(grid.nodes[j]);
  }
  weight /= weight.sum();
  // 2 x 122000 proposals per node, about 1e7 per step size.
  const std::uint64_t pairs = 122000;

  std::vector<double> ula, ula_avg, rwm;
  double worst_noise = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double gamma = gammas[i];
    const auto ula_residual = [&](double x) {
      return ula_pullback(mix, 128, gamma, cubic_sine, x) - cubic_sine(x) - gamma * lf(x);
    };
    ula.push_back(std::abs(ula_residual(0.5)));
    double u_avg = 0.0, r_avg = 0.0, var = 0.0;
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      const double x = grid.nodes[j];
      u_avg += weight[j] * std::abs(ula_residual(x));
      const MonteCarloEstimate mc = rwm_pullback_mc(
          mix, gamma, cubic_sine, x, pairs, splitmix64(1000 * i + static_cast<std::uint64_t>(j)));
      r_avg += weight[j] * std::abs(mc.mean - cubic_sine(x) - gamma * lf(x));
      var += weight[j] * weight[j] * mc.standard_error * mc.standard_error;
    }
    ula_avg.push_back(u_avg);
    rwm.push_back(r_avg);
    worst_noise = std::max(worst_noise, std::sqrt(var) / r_avg);
    note("gamma=%.3e  ULA |residual| at 0.5: %.4e, pi-avg %.4e;  RWM pi-avg %.4e (se %.1e)",
         gamma, ula.back(), u_avg, r_avg, std::sqrt(var));
  }
  const double s_ula = loglog_slope(gammas, ula);
  const double s_rwm = loglog_slope(gammas, rwm);
  out.check(std::abs(s_ula - 2.0) <= 0.2, "ULA Gauss-Hermite slope at x=0.5: %.4f  want 2.0 +- 0.2",
            s_ula);
  note("ULA pi-averaged slope %.4f", loglog_slope(gammas, ula_avg));
  out.check(std::abs(s_rwm - 1.5) <= 0.3,
            "RWM Monte Carlo slope of the pi-averaged residual: %.4f  want 1.5 +- 0.3", s_rwm);
  out.check(worst_noise < 0.05, "RWM Monte Carlo noise at most %.2g of the residual",
            worst_noise);
  return out;
}

// 6 -------------------------------------------------------------------------

Outcome generator_identities() {
  Outcome out;
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> centre(-3.0, 3.0);
  std::uniform_int_distribution<int> count(1, 5);
  const Potential targets[] = {mixture(), gaussian_potential(1, Eigen::MatrixXd::Constant(1, 1, 2.0))};
  double worst_ibp = 0.0, worst_centre = 0.0, scale = 0.0;
  const int triples = 50;
  for (int k = 0; k < triples; ++k) {
    const Potential& p = targets[k % 2];
    const int m = count(rng);
    const double lo = centre(rng);
    const ControlBasis basis = gaussian_kernel_basis_1d(m, lo, lo + 1.0 + 2.0 * (m - 1));
    Eigen::VectorXd t1(m), t2(m), t3(m);
    for (int i = 0; i < m; ++i) {
      t1[i] = coef(rng);
      t2[i] = coef(rng);
      t3[i] = coef(rng);
    }
    const ScalarFunction density = density_function(p, 8.0);
    const QuadratureGrid grid = make_grid(8.0, 257);
    const auto g = [&](const Eigen::VectorXd& t, double y) {
      return t.dot(basis.values(v1(y)));
    };
    const auto dg = [&](const Eigen::VectorXd& t, double y) {
      return (basis.gradients(v1(y)).transpose() * t)[0];
    };
    const double lhs = integrate(grid, [&](double y) {
                         return g(t1, y) * generator_apply(p, basis, t2, v1(y)) * density(y);
                       }).value;
    const double rhs =
        -integrate(grid, [&](double y) { return dg(t1, y) * dg(t2, y) * density(y); }).value;
    const double centred =
        integrate(grid, [&](double y) { return generator_apply(p, basis, t3, v1(y)) * density(y); })
            .value;
    worst_ibp = std::max(worst_ibp, std::abs(lhs - rhs));
    scale = std::max(scale, std::abs(rhs));
    worst_centre = std::max(worst_centre, std::abs(centred));
  }
  out.check(worst_ibp <= 1e-7, "max |int g1 Lg2 pi + int g1' g2' pi| = %.3g over %d triples",
            worst_ibp, triples);
  out.check(worst_centre <= 1e-7, "max |pi(L g_theta)| = %.3g over %d draws", worst_centre,
            triples);
  note("largest |int g1' g2' pi| among the triples: %.3g", scale);
  return out;
}

// 7 -------------------------------------------------------------------------

Outcome spectral_calibration() {
  Outcome out;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  Eigen::VectorXd iid(1000000);
  for (Eigen::Index i = 0; i < iid.size(); ++i) iid[i] = z(rng);
  const double s2 = spectral_variance(iid).sigma2;
  out.check(std::abs(s2 - 1.0) <= 0.1, "iid N(0,1), n=1e6: sigma2_S = %.5f  want 1 +- 0.1", s2);
  const double flat = spectral_variance(Eigen::VectorXd::Constant(1000000, -2.5)).sigma2;
  out.check(flat == 0.0, "constant input, n=1e6: sigma2_S = %.17g  want exactly 0", flat);
  const double short_flat = spectral_variance(Eigen::VectorXd::Constant(1000, 0.1)).sigma2;
  out.check(short_flat == 0.0, "constant input, n=1e3: sigma2_S = %.17g  want exactly 0",
            short_flat);
  return out;
}

// 8 -------------------------------------------------------------------------

double hazard_oracle(double s) {
  // 1 / int_0^inf exp(-s u - u^2/2) du, composite Simpson in long double.
  const long double sl = s;
  const long double upper = 60.0L / std::max(1.0L, sl);
  const int n = 400000;
  const long double h = upper / n;
  long double acc = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const long double u = h * i;
    const long double w = (i == 0 || i == n) ? 1.0L : (i % 2 ? 4.0L : 2.0L);
    acc += w * std::exp(-sl * u - 0.5L * u * u);
  }
  return static_cast<double>(1.0L / (acc * h / 3.0L));
}

void regression_vrf(Outcome& out, Preset preset) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = preset_config(preset);
  c.replicas = 20;
  const ExperimentResult res = run_experiment(c, g_threads);
  SyntheticSpec spec;
  parse_synthetic(c.data, &spec);
  const std::string name = to_string(preset);
  const char* model = name.c_str();
  for (Algorithm a : c.algorithms) {
    const std::string alg = to_string(a);
    for (int k = 1; k <= spec.dim; ++k) {
      const std::string f = "x" + std::to_string(k);
      const ResultRow* cv2 = find_row(res.rows, alg, f, "CV", "second");
      const ResultRow* cv1 = find_row(res.rows, alg, f, "CV", "first");
      const ResultRow* zv2 = find_row(res.rows, alg, f, "ZV", "second");
      if (!cv2 || !cv1 || !zv2) {
        out.check(false, "%s %s %s rows missing", model, alg.c_str(), f.c_str());
        continue;
      }
      out.check(cv2->vrf_median > 10.0 && cv2->vrf_median >= cv1->vrf_median,
                "%-8s %-4s %s: median VRF CV-2 %9.1f > 10, >= CV-1 %7.1f  (ZV-2 %9.1f)",
                model, alg.c_str(), f.c_str(), cv2->vrf_median, cv1->vrf_median,
                zv2->vrf_median);
    }
  }
  note("%s: %s, d=%d, R=%u, N=%llu, n=%llu, %.0f s", to_string(preset).c_str(),
       c.data.c_str(), spec.dim, c.replicas, static_cast<unsigned long long>(c.burn_in),
       static_cast<unsigned long long>(c.samples), seconds_since(t0));
}

Outcome regression_properties() {
  Outcome out;
  regression_vrf(out, Preset::logistic);
  regression_vrf(out, Preset::probit);

  const double t = probit::kSeriesBranch;
  const double jump = std::abs(probit::hazard(t) - probit::hazard(std::nextafter(t, 0.0)));
  out.check(jump < 1e-7, "probit h'(t) jump across t=%g: %.3g < 1e-7", t, jump);

  const double s = 30.0;
  const double h = probit::hazard(-s);
  const double oracle = hazard_oracle(s);
  const double expansion = s * (1.0 + 1.0 / (s * s) - 2.0 / std::pow(s, 4));
  note("h'(-30) = %.17g, quadrature oracle %.17g, rel. error %.3g", h, oracle,
       std::abs(h - oracle) / oracle);
  const double rel = std::abs(h - expansion) / expansion;
  out.check(rel < 1e-8, "h'(-30) vs s(1 + s^-2 - 2 s^-4): rel. error %.4g < 1e-8", rel);
  if (rel >= 1e-8) {
    note("the first omitted term of the expansion is 10 s^-6 = %.4g at s=30; h' agrees with "
         "the quadrature oracle, so the truncated expansion cannot meet 1e-8",
         10.0 / std::pow(s, 6));
  }
  return out;
}

// 9 -------------------------------------------------------------------------

std::string without_timestamp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream kept;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("\"timestamp\":") == std::string::npos) kept << line << '\n';
  }
  return kept.str();
}

std::string bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void compare_runs(Outcome& out, const ExperimentConfig& c, const std::string& label,
                  const std::filesystem::path& root) {
  struct Run {
    unsigned threads;
    const char* stamp;
  };
  const Run runs[] = {{1, "2026-01-01T00:00:00Z"}, {1, "2026-06-30T12:34:56Z"}, {4, "2027-12-31T23:59:59Z"}};
  std::vector<std::filesystem::path> dirs;
  for (std::size_t i = 0; i < 3; ++i) {
    dirs.push_back(root / (label + "_" + std::to_string(i)));
    emit_results(run_experiment(c, runs[i].threads), dirs.back(), runs[i].stamp);
  }
  const std::string first = without_timestamp(dirs[0] / "results.json");
  out.check(!first.empty() && bytes(dirs[0] / "results.json") != bytes(dirs[1] / "results.json"),
            "%s: timestamps differ between runs", label.c_str());
  for (std::size_t i = 1; i < 3; ++i) {
    out.check(first == without_timestamp(dirs[i] / "results.json"),
              "%s: results.json of run %zu (%u thread%s) identical to run 0 excluding timestamp",
              label.c_str(), i, runs[i].threads, runs[i].threads == 1 ? "" : "s");
    out.check(bytes(dirs[0] / "results.csv") == bytes(dirs[i] / "results.csv"),
              "%s: results.csv of run %zu byte-identical", label.c_str(), i);
  }
}

Outcome determinism() {
  Outcome out;
  const auto root = std::filesystem::temp_directory_path() / "lcv_acceptance_determinism";
  std::filesystem::remove_all(root);
  compare_runs(out, preset_config(Preset::mixture1d), "mixture1d", root);
  ExperimentConfig l = preset_config(Preset::logistic);
  l.burn_in = 10000;
  l.samples = 50000;
  l.replicas = 6;
  l.split_fit = true;
  compare_runs(out, l, "logistic", root);
  std::filesystem::remove_all(root);
  return out;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only this criterion (repeatable)")->check(CLI::Range(1, 9));
  app.add_option("--threads", g_threads, "Worker threads (0 = all cores)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "truncation table sigma2 over a in {3,4,5,6}", truncation_table},
      {2, "optimal CV and ZV coefficients at a=5", optimal_coefficients},
      {3, "mixture asymptotic variances and ordering", mixture_table},
      {4, "exact control variate on the gaussian target", exact_control_variate},
      {5, "generator expansion orders for ULA and RWM", generator_order},
      {6, "carre du champ and centring identities", generator_identities},
      {7, "spectral estimator calibration", spectral_calibration},
      {8, "regression variance reduction and probit tail", regression_properties},
      {9, "deterministic results across runs and threads", determinism},
  };

  bool all = true;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::printf("AC%d %s\n", c.id, c.title);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, "exception: %s", e.what());
    }
    std::printf("AC%d %s  %s (%.1f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
                seconds_since(t0));
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
