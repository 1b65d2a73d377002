// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mortmix/cli.hpp"
#include "mortmix/data_io.hpp"
#include "mortmix/estimation.hpp"
#include "mortmix/mixture.hpp"
#include "mortmix/simulation.hpp"
#include "mortmix/special_functions.hpp"
#include "synthetic.hpp"
#include "test_models.hpp"
#include "test_paths.hpp"

using namespace mortmix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative recovery tolerances for (a, b, c), frozen from 100 replicate fits
// (tools/calibrate_recovery, seeds 1000..1099): the largest error seen,
// rounded up. Observed maxima were 0.0198, 0.0021 and 0.0597.
constexpr double kTolA = 0.02;
constexpr double kTolB = 0.0025;
constexpr double kTolC = 0.06;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::vector<HazardModel> random_models(std::uint64_t seed, std::size_t per_family,
                                       std::initializer_list<Family> families) {
  test_models::Draws draws(seed);
  std::vector<HazardModel> out;
  for (std::size_t i = 0; i < per_family; ++i) {
    for (Family f : families) out.push_back(draws.draw(f));
  }
  return out;
}

std::vector<HazardModel> figure1_and_random(std::uint64_t seed) {
  auto models = test_models::figure1();
  // 100 draws across the five families
  for (const auto& m : random_models(seed, 20,
                                     {Family::gompertz_makeham, Family::gamma_gompertz_makeham, Family::beard_makeham,
                                      Family::kannisto_makeham, Family::siler})) {
    models.push_back(m);
  }
  return models;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

Outcome mixture_identity() {
  double worst = 0.0;
  for (const auto& m : figure1_and_random(101)) {
    const MakehamMixture mix(m);
    for (double x = 0.0; x <= 110.0; x += 0.5) {
      const double f = mix.total_density(x);
      const double g1 = mix.premature_density(x);
      const double g2 = mix.senescent_density(x);
      worst = std::max(worst, std::abs(f - (mix.pi() * g1 + (1.0 - mix.pi()) * g2)));
    }
  }
  return {worst < 1e-10, "max |f - mixture| = " + fmt(worst)};
}

Outcome normalization() {
  double worst = 0.0;
  for (const auto& m : figure1_and_random(102)) {
    const MakehamMixture mix(m);
    for (auto fn : std::vector<std::function<double(double)>>{
             [&](double x) { return mix.total_density(x); }, [&](double x) { return mix.premature_density(x); },
             [&](double x) { return mix.senescent_density(x); }}) {
      worst = std::max(worst, std::abs(integrate(fn, 0.0, kInf) - 1.0));
    }
  }
  return {worst < 1e-8, "max |integral - 1| = " + fmt(worst)};
}

Outcome closed_form_pi() {
  double worst = 0.0;
  for (const auto& m : random_models(103, 100, {Family::gompertz_makeham, Family::gamma_gompertz_makeham})) {
    const auto closed = mixing_proportion_detailed(m);
    if (closed.fell_back) return {false, "closed form fell back to quadrature"};
    worst = std::max(worst, std::abs(closed.value - mixing_proportion_by_quadrature(m)));
  }
  return {worst < 1e-8, "max |closed - quadrature| = " + fmt(worst)};
}

Outcome pi_life_expectancy() {
  double worst = 0.0;
  for (const auto& m : figure1_and_random(104)) {
    const double e0 = remaining_life_expectancy(m, 0.0, Subpopulation::overall);
    worst = std::max(worst, std::abs(mixing_proportion(m) - makeham_term(m) * e0));
  }
  return {worst < 1e-8, "max |pi - c e0| = " + fmt(worst)};
}

Outcome threshold() {
  double worst_h = 0.0;
  double worst_p = 0.0;
  for (const auto& m : figure1_and_random(105)) {
    const double xs = threshold_age(m);
    if (xs > 0.0) {
      worst_h = std::max(worst_h, std::abs(baseline_hazard(m, xs) - makeham_term(m)));
      worst_p = std::max(worst_p, std::abs(premature_prevalence(m, xs) - 0.5));
    }
  }
  const double xa = threshold_age(GompertzMakeham{0.0005, 0.1, 0.005});
  const double xc = threshold_age(GompertzMakeham{0.4, 0.8, 0.2});
  const bool ok = worst_h < 1e-10 && worst_p < 1e-8 && std::abs(xa - 10.0 * std::log(10.0)) < 1e-10 && xc == 0.0;
  return {ok, "max |h(x*) - c| = " + fmt(worst_h) + ", max |p(x*) - 1/2| = " + fmt(worst_p) +
                  ", Fig 1(a) x* = " + std::to_string(xa) + ", Fig 1(c) x* = " + std::to_string(xc)};
}

Outcome modal_ages() {
  double worst_gap = 0.0;
  double worst_residual = 0.0;
  std::size_t checked = 0;
  auto models = random_models(106, 30, {Family::gompertz_makeham, Family::beard_makeham, Family::gamma_gompertz_makeham});
  models.push_back(GompertzMakeham{0.0005, 0.1, 0.005});
  models.push_back(GammaGompertzMakeham{0.0005, 0.1, 0.2, 0.005});
  models.push_back(BeardMakeham{0.0005, 0.1, 0.5, 0.005});
  for (const auto& m : models) {
    const auto closed = senescent_modal_age_closed_form(m);
    if (!closed) continue;
    ++checked;
    worst_gap = std::max(worst_gap, std::abs(*closed - modal_age_numeric(m, Subpopulation::senescent)));
    const double h = baseline_hazard(m, *closed);
    worst_residual =
        std::max(worst_residual, std::abs(h + makeham_term(m) - baseline_hazard_derivative(m, *closed) / h));
  }
  return {checked > 0 && worst_gap < 1e-3 && worst_residual < 1e-8,
          std::to_string(checked) + " closed forms, max |closed - argmax| = " + fmt(worst_gap) +
              ", max stationarity residual = " + fmt(worst_residual)};
}

Outcome monte_carlo() {
  const GompertzMakeham gm{0.0005, 0.1, 0.005};
  constexpr std::size_t n = 1000000;
  const auto samples = simulate_cohort(makeham_causes(gm), n, 20240917, {.threads = 4, .shard_size = 65536});
  const double pi = mixing_proportion(gm);
  const auto est = empirical_pi(samples, 0);
  const double bound = 3.0 * std::sqrt(pi * (1.0 - pi) / n);
  const double sup = survival_sup_distance(samples, [&](double x) { return survival(gm, x); });
  const double band = dkw_band(n, 0.01);
  return {std::abs(est.value - pi) < bound && sup < band,
          "|pi_hat - pi| = " + fmt(std::abs(est.value - pi)) + " (bound " + fmt(bound) + "), sup|S_hat - S| = " +
              fmt(sup) + " (DKW " + fmt(band) + ")"};
}

Outcome map_recovery() {
  const GompertzMakeham truth{0.0005, 0.1, 0.005};
  std::vector<LifeTableSlice> panel;
  for (std::uint64_t i = 0; i < 10; ++i) panel.push_back(synthetic::slice(truth, 1000 + i));
  FitOptions opts;
  opts.threads = 1;
  const auto series = fit_series(panel, Family::gompertz_makeham, PriorSpec::standard(), opts);
  if (!series.errors.empty()) return {false, "slice failed: " + series.errors.front().message};
  double ea = 0.0, eb = 0.0, ec = 0.0, emu = 0.0;
  for (const auto& r : series.results) {
    const auto& m = std::get<GompertzMakeham>(r.model);
    ea = std::max(ea, std::abs(m.a / truth.a - 1.0));
    eb = std::max(eb, std::abs(m.b / truth.b - 1.0));
    ec = std::max(ec, std::abs(m.c / truth.c - 1.0));
    for (int age = 20; age <= 100; ++age) {
      const double x = age + 0.5;
      emu = std::max(emu, std::abs(total_hazard(m, x) / total_hazard(truth, x) - 1.0));
    }
  }
  return {ea <= kTolA && eb <= kTolB && ec <= kTolC && emu <= 0.05,
          "max rel error a " + fmt(ea) + ", b " + fmt(eb) + ", c " + fmt(ec) + ", mu " + fmt(emu)};
}

Outcome special_functions() {
  double worst = 0.0;
  for (double u : {-0.5, -0.05, 0.3, 1.7}) {
    for (double x : {0.005, 0.1, 1.0, 5.0}) {
      const double lhs = upper_incomplete_gamma(u + 1.0, x);
      const double rhs = u * upper_incomplete_gamma(u, x) + std::pow(x, u) * std::exp(-x);
      worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
    }
  }
  const double f = gauss_2f1(1.0, 1.0, 2.0, 0.5);
  const double gap = std::abs(f - 2.0 * std::log(2.0));
  return {worst < 1e-12 && gap < 1e-10, "recurrence residual " + fmt(worst) + ", |2F1 - 2 ln 2| = " + fmt(gap)};
}

bool same_12_digits(double x, double y) {
  if (x == y) return true;
  return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y));
}

Outcome pipeline() {
  const auto dir = std::filesystem::temp_directory_path() / "mortmix_acceptance";
  std::filesystem::create_directories(dir);
  const auto out = dir / "results.csv";
  std::ostringstream cout_sink;
  std::ostringstream cerr_sink;
  const int code = cli::run({"fit", "--deaths", test_paths::deaths_fixture().string(), "--exposures",
                             test_paths::exposures_fixture().string(), "--out", out.string()},
                            cout_sink, cerr_sink);
  if (code != 0) return {false, "fit exited with " + std::to_string(code) + ": " + cerr_sink.str()};
  std::ifstream in(out);
  const auto records = read_results(in);
  std::filesystem::remove_all(dir);
  if (records.size() != 6) return {false, std::to_string(records.size()) + " rows instead of 6"};

  std::size_t compared = 0;
  for (const auto& rec : records) {
    const std::vector<double> params = {*rec.values.at("a"), *rec.values.at("b"), *rec.values.at("c")};
    const auto d = decompose(make_model(Family::gompertz_makeham, params));
    const std::pair<const char*, double> expected[] = {{"pi", d.pi},
                                                       {"threshold_age", d.threshold_age},
                                                       {"modal_age_senescent", d.modal_age_senescent},
                                                       {"modal_age_overall", d.modal_age_overall}};
    for (const auto& [column, value] : expected) {
      if (!same_12_digits(*rec.values.at(column), value)) {
        return {false, std::string(column) + " differs for " + std::to_string(rec.year) + " " + rec.sex};
      }
      ++compared;
    }
  }
  return {true, std::to_string(compared) + " derived values match to 12 significant digits"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0 for no limit
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "mixture identity", 5.0, mixture_identity},
      {2, "normalization", 10.0, normalization},
      {3, "closed-form pi", 10.0, closed_form_pi},
      {4, "pi = c e0", 0.0, pi_life_expectancy},
      {5, "threshold age", 0.0, threshold},
      {6, "modal ages", 0.0, modal_ages},
      {7, "Monte Carlo consistency", 30.0, monte_carlo},
      {8, "MAP recovery", 60.0, map_recovery},
      {9, "special functions", 0.0, special_functions},
      {10, "pipeline end-to-end", 0.0, pipeline},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0.0 && seconds >= c.limit_seconds) {
      o.pass = false;
      o.detail += "; over the " + std::to_string(static_cast<int>(c.limit_seconds)) + " s limit";
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %-24s %.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds, o.detail.c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
