#pragma once

#include <cstdint>
#include <random>

#include "mortmix/estimation.hpp"

namespace synthetic {

/// One life-table slice with deaths drawn as Poisson(E mu(age + 1/2)), or set
/// to their expectation when `exact` is true.
inline mortmix::LifeTableSlice slice(const mortmix::HazardModel& truth, std::uint64_t seed, bool exact = false,
                                     int min_age = 20, int max_age = 100, double exposure = 1e5) {
  mortmix::LifeTableSlice s;
  s.population = "synthetic";
  s.year = 2000;
  s.sex = mortmix::Sex::female;
  std::mt19937_64 engine(seed);
  for (int age = min_age; age <= max_age; ++age) {
    const double mean = exposure * mortmix::total_hazard(truth, age + 0.5);
    double deaths = mean;
    if (!exact) deaths = static_cast<double>(std::poisson_distribution<long long>(mean)(engine));
    s.rows.push_back({age, deaths, exposure});
  }
  return s;
}

}  // namespace synthetic
