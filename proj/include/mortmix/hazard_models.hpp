#pragma once

// Makeham-family mortality models, mu(x) = h(x) + c.
//
// Each family stores its baseline (senescent) parameters plus the constant
// Makeham term c. All evaluation functions take ages in years and are pure.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mortmix {

struct GompertzMakeham {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Gompertz baseline with gamma-distributed frailty of variance `gamma`.
struct GammaGompertzMakeham {
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;
  double c = 0.0;
};

struct BeardMakeham {
  double a = 0.0;
  double b = 0.0;
  double k = 0.0;
  double c = 0.0;
};

/// Logistic baseline a e^{bx} / (1 + a e^{bx}); identical to Beard with k = 1.
struct KannistoMakeham {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Infant term a1 e^{-b1 x} plus senescent term a2 e^{b2 x}.
struct SilerMakeham {
  double a1 = 0.0;
  double b1 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
  double c = 0.0;
};

using HazardModel =
    std::variant<GompertzMakeham, GammaGompertzMakeham, BeardMakeham, KannistoMakeham, SilerMakeham>;

enum class Family { gompertz_makeham, gamma_gompertz_makeham, beard_makeham, kannisto_makeham, siler };

Family family_of(const HazardModel& model);

/// Short tag used on the command line and in result files: gm, ggm, beard, kannisto, siler.
std::string_view family_tag(Family family);
std::optional<Family> parse_family(std::string_view tag);

/// Parameter names in storage order, e.g. {"a", "b", "gamma", "c"} for ggm.
std::vector<std::string> parameter_names(Family family);
std::vector<double> parameters(const HazardModel& model);
/// Inverse of `parameters`; `values` must have one entry per parameter name.
HazardModel make_model(Family family, std::span<const double> values);

double makeham_term(const HazardModel& model);

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate(const HazardModel& model);

/// Throws std::invalid_argument listing every violation when the model is invalid.
void require_valid(const HazardModel& model);

// Ages beyond b*x > kOverflowExponent are treated as certain death:
// survival and density evaluate to 0 instead of overflowing.
inline constexpr double kOverflowExponent = 700.0;

/// h(x). May be +inf for exponential baselines at extreme ages.
double baseline_hazard(const HazardModel& model, double x);
/// dh/dx, analytic.
double baseline_hazard_derivative(const HazardModel& model, double x);
/// H(x) = integral of h over [0, x], closed form.
double baseline_cumulative_hazard(const HazardModel& model, double x);

/// mu(x) = h(x) + c.
double total_hazard(const HazardModel& model, double x);
/// H(x) + c x.
double cumulative_hazard(const HazardModel& model, double x);
double survival(const HazardModel& model, double x);
double density(const HazardModel& model, double x);

}  // namespace mortmix
