#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mortmix/errors.hpp"
#include "mortmix/hazard_models.hpp"
#include "oracles.hpp"
#include "test_models.hpp"

using namespace mortmix;

TEST_SUITE("hazard_models") {
  TEST_CASE("validation") {
    CHECK(validate(GompertzMakeham{0.0005, 0.1, 0.005}).ok());
    CHECK(validate(GompertzMakeham{0.0005, 0.1, 0.0}).ok());
    const auto bad = validate(GompertzMakeham{0.0, 0.1, 0.005});
    REQUIRE(bad.violations.size() == 1);
    CHECK(bad.violations[0] == "a must be > 0");
    CHECK_FALSE(validate(GompertzMakeham{0.0005, 0.1, -0.1}).ok());
    CHECK_FALSE(validate(GammaGompertzMakeham{0.0005, 0.1, 0.0, 0.005}).ok());
    CHECK_FALSE(validate(BeardMakeham{0.0005, 0.1, -1.0, 0.005}).ok());
    CHECK_FALSE(validate(SilerMakeham{0.01, 1.0, 0.0005, std::nan(""), 0.005}).ok());
    CHECK_THROWS_AS(require_valid(GompertzMakeham{0.0, 0.0, 0.0}), std::invalid_argument);
  }

  TEST_CASE("parameter round trip and tags") {
    for (const auto& m : test_models::assorted()) {
      const auto fam = family_of(m);
      CHECK(parse_family(family_tag(fam)) == fam);
      const auto p = parameters(m);
      CHECK(p.size() == parameter_names(fam).size());
      CHECK(parameters(make_model(fam, p)) == p);
    }
    CHECK_FALSE(parse_family("weibull").has_value());
    CHECK(parameter_names(Family::siler) == std::vector<std::string>{"a1", "b1", "a2", "b2", "c"});
  }

  TEST_CASE("hazard values") {
    const GompertzMakeham gm{0.0005, 0.1, 0.005};
    CHECK(baseline_hazard(gm, 0.0) == doctest::Approx(0.0005).epsilon(1e-15));
    CHECK(total_hazard(gm, 0.0) == doctest::Approx(0.0055).epsilon(1e-15));
    CHECK(baseline_hazard(SilerMakeham{0.01, 1.0, 0.0005, 0.1, 0.005}, 0.0) == doctest::Approx(0.0105).epsilon(1e-15));
    const double xstar = oracle::bisect([&](double x) { return baseline_hazard(gm, x) - gm.c; }, 0.0, 120.0);
    CHECK(xstar == doctest::Approx(23.0258509).epsilon(1e-8));
    CHECK(total_hazard(gm, 23.0258509299404568) == doctest::Approx(0.010).epsilon(1e-12));
    CHECK(total_hazard(GompertzMakeham{0.0005, 0.1, 0.0}, 30.0) == baseline_hazard(gm, 30.0));
    CHECK(density(gm, 0.0) == doctest::Approx(0.0055).epsilon(1e-15));
    CHECK(survival(gm, 50.0) ==
          doctest::Approx(std::exp(-0.005 * (std::exp(5.0) - 1.0) - 0.25)).epsilon(1e-14));
    CHECK(cumulative_hazard(gm, 10.0) == doctest::Approx(0.005 * (std::exp(1.0) - 1.0) + 0.05).epsilon(1e-14));
  }

  TEST_CASE("negative ages are rejected") {
    CHECK_THROWS_AS(total_hazard(GompertzMakeham{0.0005, 0.1, 0.005}, -1.0), DomainError);
    CHECK_THROWS_AS(survival(KannistoMakeham{0.001, 0.1, 0.01}, -0.5), DomainError);
  }

  TEST_CASE("cumulative hazard matches quadrature of the hazard") {
    for (const auto& m : test_models::assorted()) {
      CAPTURE(family_tag(family_of(m)));
      CHECK(cumulative_hazard(m, 0.0) == 0.0);
      for (double x = 0.5; x <= 120.0; x += 0.5) {
        const double ref = oracle::quad([&](double t) { return total_hazard(m, t); }, 0.0, x, 20);
        const double got = cumulative_hazard(m, x);
        if (!std::isfinite(ref) || ref > 1e300) continue;
        CHECK(std::abs(got - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
      }
    }
  }

  TEST_CASE("survival is exp of minus the cumulative hazard, non-increasing, in [0, 1]") {
    for (const auto& m : test_models::assorted()) {
      double prev = 1.0;
      CHECK(survival(m, 0.0) == 1.0);
      for (double x = 0.0; x <= 120.0; x += 0.5) {
        const double s = survival(m, x);
        CHECK(s == doctest::Approx(std::exp(-cumulative_hazard(m, x))).epsilon(1e-15));
        CHECK(s <= prev);
        CHECK(s >= 0.0);
        CHECK(density(m, x) >= 0.0);
        prev = s;
      }
    }
  }

  TEST_CASE("density integrates to one") {
    for (const auto& m : test_models::figure1()) {
      const double total = oracle::quad([&](double x) { return density(m, x); }, 0.0, 200.0, 2000);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("extreme ages do not overflow") {
    const GompertzMakeham gm{0.0005, 0.1, 0.005};
    CHECK(survival(gm, 8000.0) == 0.0);
    CHECK(density(gm, 8000.0) == 0.0);
    CHECK(survival(SilerMakeham{0.01, 1.0, 0.0005, 0.1, 0.005}, 9000.0) == 0.0);
    CHECK(survival(gm, 400.0) == 0.0);
  }

  TEST_CASE("c = 0 gives pure Gompertz") {
    const double a = 0.0005, b = 0.1;
    const GompertzMakeham gm{a, b, 0.0};
    for (double x : {0.0, 10.0, 70.0, 100.0}) {
      const double s = std::exp(-a / b * (std::exp(b * x) - 1.0));
      CHECK(survival(gm, x) == doctest::Approx(s).epsilon(1e-14));
      CHECK(density(gm, x) == doctest::Approx(a * std::exp(b * x) * s).epsilon(1e-13));
    }
  }

  TEST_CASE("gamma frailty baseline tends to Gompertz as gamma -> 0") {
    const GammaGompertzMakeham ggm{0.0005, 0.1, 1e-10, 0.005};
    const GompertzMakeham gm{0.0005, 0.1, 0.005};
    for (double x = 0.0; x <= 110.0; x += 5.0) {
      CHECK(baseline_hazard(ggm, x) == doctest::Approx(baseline_hazard(gm, x)).epsilon(1e-6));
      CHECK(cumulative_hazard(ggm, x) == doctest::Approx(cumulative_hazard(gm, x)).epsilon(1e-6));
    }
  }

  TEST_CASE("gamma frailty cumulative hazard at age 50") {
    const GammaGompertzMakeham ggm{0.0005, 0.1, 0.2, 0.005};
    const double ref = oracle::quad([&](double t) { return total_hazard(ggm, t); }, 0.0, 50.0);
    CHECK(cumulative_hazard(ggm, 50.0) == doctest::Approx(ref).epsilon(1e-12));
    // log1p(0.001 (e^5 - 1)) / 0.2 + 0.25
    CHECK(cumulative_hazard(ggm, 50.0) == doctest::Approx(std::log1p(0.001 * std::expm1(5.0)) / 0.2 + 0.25).epsilon(1e-14));
  }

  TEST_CASE("Kannisto is Beard with k = 1") {
    const KannistoMakeham kan{0.001, 0.1, 0.01};
    const BeardMakeham beard{0.001, 0.1, 1.0, 0.01};
    for (double x = 0.0; x <= 150.0; x += 0.25) {
      CHECK(baseline_hazard(kan, x) == baseline_hazard(beard, x));
      CHECK(baseline_hazard_derivative(kan, x) == baseline_hazard_derivative(beard, x));
      CHECK(cumulative_hazard(kan, x) == cumulative_hazard(beard, x));
      CHECK(survival(kan, x) == survival(beard, x));
      CHECK(density(kan, x) == density(beard, x));
    }
  }

  TEST_CASE("analytic derivative matches central differences") {
    for (const auto& m : test_models::assorted()) {
      for (double x : {1.0, 20.0, 55.0, 90.0}) {
        const double step = 1e-5;
        const double fd = (baseline_hazard(m, x + step) - baseline_hazard(m, x - step)) / (2 * step);
        CHECK(baseline_hazard_derivative(m, x) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}
