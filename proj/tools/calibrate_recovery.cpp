// One-off calibration of the MAP recovery tolerances: fits 100 Poisson
// replicates of the GM acceptance slice (seeds 1000..1099, which include the
// ten the acceptance test uses) and prints error quantiles for a, b, c and mu.
//
//   calibrate_recovery [replicates] [threads]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "mortmix/estimation.hpp"
#include "synthetic.hpp"

using namespace mortmix;

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(i, v.size() - 1)];
}

}  // namespace

int main(int argc, char** argv) {
  const int replicates = argc > 1 ? std::atoi(argv[1]) : 100;
  const int threads = argc > 2 ? std::atoi(argv[2]) : 4;
  const GompertzMakeham truth{0.0005, 0.1, 0.005};

  std::vector<LifeTableSlice> panel;
  for (int i = 0; i < replicates; ++i) panel.push_back(synthetic::slice(truth, 1000 + i));
  FitOptions opts;
  opts.threads = threads;
  const auto series = fit_series(panel, Family::gompertz_makeham, PriorSpec::standard(), opts);
  for (const auto& e : series.errors) std::fprintf(stderr, "replicate %zu failed: %s\n", e.index, e.message.c_str());

  std::vector<double> ea, eb, ec, emu;
  for (const auto& r : series.results) {
    const auto& m = std::get<GompertzMakeham>(r.model);
    ea.push_back(std::abs(m.a / truth.a - 1.0));
    eb.push_back(std::abs(m.b / truth.b - 1.0));
    ec.push_back(std::abs(m.c / truth.c - 1.0));
    double worst = 0.0;
    for (int age = 20; age <= 100; ++age) {
      worst = std::max(worst, std::abs(total_hazard(m, age + 0.5) / total_hazard(truth, age + 0.5) - 1.0));
    }
    emu.push_back(worst);
  }
  if (ea.empty()) return 1;

  std::printf("%zu fits\n%-4s %10s %10s %10s %10s\n", ea.size(), "", "median", "p95", "p99", "max");
  const std::pair<const char*, const std::vector<double>*> rows[] = {{"a", &ea}, {"b", &eb}, {"c", &ec}, {"mu", &emu}};
  for (const auto& [name, v] : rows) {
    std::printf("%-4s %10.4f %10.4f %10.4f %10.4f\n", name, quantile(*v, 0.5), quantile(*v, 0.95), quantile(*v, 0.99),
                quantile(*v, 1.0));
  }
  return series.errors.empty() ? 0 : 1;
}
