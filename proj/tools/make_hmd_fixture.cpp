// Writes synthetic HMD 1x1 deaths and exposures files drawn from known
// Gompertz-Makeham parameters. The shipped fixtures in tests/fixtures were
// produced with the defaults:
//
//   make_hmd_fixture tests/fixtures/synthetic_deaths.txt tests/fixtures/synthetic_exposures.txt

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "mortmix/hazard_models.hpp"

namespace {

constexpr int kYears[] = {2000, 2001, 2002};
constexpr double kExposure = 1e5;

// c rises by 10% a year so a series fit has a known direction.
mortmix::GompertzMakeham truth(bool male, int year_index) {
  const double scale = 1.0 + 0.1 * year_index;
  return male ? mortmix::GompertzMakeham{5e-4, 0.1, 5e-3 * scale} : mortmix::GompertzMakeham{3e-4, 0.105, 3e-3 * scale};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_hmd_fixture DEATHS_OUT EXPOSURES_OUT\n";
    return 1;
  }
  std::ofstream deaths(argv[1]);
  std::ofstream exposures(argv[2]);
  if (!deaths || !exposures) {
    std::cerr << "cannot open output files\n";
    return 3;
  }
  deaths << "Synthetic population, Deaths (period 1x1), Gompertz-Makeham truth\n\n"
         << "  Year      Age         Female           Male          Total\n";
  exposures << "Synthetic population, Exposure to risk (period 1x1), Gompertz-Makeham truth\n\n"
            << "  Year      Age         Female           Male          Total\n";

  std::mt19937_64 engine(20240601);
  for (int yi = 0; yi < 3; ++yi) {
    for (int age = 0; age <= 110; ++age) {
      const bool open = age == 110;
      double d[2];
      for (int s = 0; s < 2; ++s) {
        const double mu = mortmix::total_hazard(truth(s == 1, yi), age + 0.5);
        std::poisson_distribution<long> draw(kExposure * mu);
        d[s] = static_cast<double>(draw(engine));
      }
      const std::string label = open ? "110+" : std::to_string(age);
      char line[128];
      std::snprintf(line, sizeof line, "  %4d  %7s  %13s  %13s  %13s\n", kYears[yi], label.c_str(), fmt(d[0]).c_str(),
                    fmt(d[1]).c_str(), fmt(d[0] + d[1]).c_str());
      deaths << line;
      std::snprintf(line, sizeof line, "  %4d  %7s  %13s  %13s  %13s\n", kYears[yi], label.c_str(),
                    fmt(kExposure).c_str(), fmt(kExposure).c_str(), fmt(2 * kExposure).c_str());
      exposures << line;
    }
  }
  return 0;
}
