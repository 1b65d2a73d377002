#pragma once

// Two-component mixture view of a Makeham model:
//
//   f(x) = pi g1(x) + (1 - pi) g2(x),
//   g1(x) = c S(x) / pi,   g2(x) = h(x) S(x) / (1 - pi),
//
// where g1 is the lifespan density of those killed by the constant
// (premature) risk and g2 of those killed by the senescent baseline, each in
// the presence of the other risk.

#include <optional>
#include <span>
#include <vector>

#include "mortmix/hazard_models.hpp"
#include "mortmix/special_functions.hpp"

namespace mortmix {

enum class Component { premature, senescent };
enum class Subpopulation { overall, premature, senescent };

/// Upper end of the age range used by numeric root and argmax searches.
inline constexpr double kMaxSearchAge = 150.0;
/// Coarse grid step for numeric argmax before golden-section refinement.
inline constexpr double kArgmaxGridStep = 0.1;

enum class PiMethod { zero_makeham_term, incomplete_gamma, hypergeometric, quadrature };

struct MixingProportion {
  double value = 0.0;
  PiMethod method = PiMethod::quadrature;
  /// True when the closed form hit a special-function domain error and the
  /// value came from quadrature instead.
  bool fell_back = false;
};

/// pi = int_0^inf c exp{-cx - H(x)} dx. Closed form for gm (incomplete gamma)
/// and ggm (hypergeometric), quadrature otherwise; 0 when c = 0.
MixingProportion mixing_proportion_detailed(const HazardModel& model, const QuadratureConfig& cfg = {});
double mixing_proportion(const HazardModel& model);
/// Always by quadrature of c S(x); the cross-check for the closed forms.
double mixing_proportion_by_quadrature(const HazardModel& model, const QuadratureConfig& cfg = {});

/// Closed-form pi for Gompertz-Makeham:
/// (c/b) (a/b)^{c/b} e^{a/b} Gamma(-c/b, a/b).
double mixing_proportion_gm(const GompertzMakeham& model);
/// Closed-form pi for gamma-Gompertz-Makeham:
/// c gamma / (b + c gamma) 2F1(1/gamma, 1; 1/gamma + c/b + 1; 1 - a gamma / b).
double mixing_proportion_ggm(const GammaGompertzMakeham& model);

/// Evaluates the mixture pieces of one model with pi computed once.
class MakehamMixture {
 public:
  explicit MakehamMixture(HazardModel model, const QuadratureConfig& cfg = {});

  const HazardModel& model() const noexcept { return model_; }
  double pi() const noexcept { return pi_.value; }
  const MixingProportion& mixing() const noexcept { return pi_; }

  /// Throws DegenerateComponentError when the component has zero weight.
  double component_density(Component component, double x) const;
  double premature_density(double x) const { return component_density(Component::premature, x); }
  double senescent_density(double x) const { return component_density(Component::senescent, x); }
  double total_density(double x) const { return density(model_, x); }

  bool has_component(Component component) const noexcept;

 private:
  HazardModel model_;
  MixingProportion pi_;
};

double component_density(const HazardModel& model, Component component, double x);

/// x* = max{max{x : h(x) = c}, 0}. Closed form where the family admits one
/// and its argument is in range, otherwise the largest root of h(x) = c on
/// [0, kMaxSearchAge]. Returns 0 when no root exists.
double threshold_age(const HazardModel& model);

/// p(x) = c / (h(x) + c), share of deaths at age x due to the constant risk.
double premature_prevalence(const HazardModel& model, double x);

/// Force of mortality of the premature subpopulation, g1(x) / int_x^inf g1.
double conditional_hazard_premature(const HazardModel& model, double x, const QuadratureConfig& cfg = {});
/// Force of mortality within a subpopulation; overall equals mu(x).
double conditional_hazard(const HazardModel& model, Subpopulation subpop, double x,
                          const QuadratureConfig& cfg = {});

/// Mean remaining lifetime at age x within the subpopulation, i.e.
/// int_x^inf S(t|j) dt / S(x|j).
double remaining_life_expectancy(const HazardModel& model, double x, Subpopulation subpop,
                                 const QuadratureConfig& cfg = {});

/// Age maximising the subpopulation's death density. The premature density is
/// proportional to S(x) and always peaks at 0. Closed forms for the senescent
/// mode of gm, ggm, beard and kannisto where their domain holds; numeric
/// argmax (grid scan + golden section) otherwise.
double modal_age(const HazardModel& model, Subpopulation subpop);
/// Numeric argmax only; used as the cross-check for the closed forms.
double modal_age_numeric(const HazardModel& model, Subpopulation subpop);
/// Closed-form senescent mode, or nullopt when the family has none or its
/// domain condition fails.
std::optional<double> senescent_modal_age_closed_form(const HazardModel& model);

struct PrevalencePoint {
  double age;
  double prevalence;
};

struct ComponentDensityPoint {
  double age;
  std::optional<double> g1;  // absent when pi = 0
  std::optional<double> g2;  // absent when pi = 1
  double f;
};

struct MixtureDecomposition {
  double pi = 0.0;
  double threshold_age = 0.0;
  double modal_age_overall = 0.0;
  double modal_age_senescent = 0.0;
  std::optional<double> modal_age_premature;  // absent when pi = 0
  double life_expectancy = 0.0;               // e_0
  std::vector<PrevalencePoint> prevalence_grid;
  std::vector<ComponentDensityPoint> component_density_grid;
};

/// Default age grid, 0 to 110 in steps of 0.5.
std::vector<double> default_age_grid();
/// Grid from `start` to `stop` inclusive in steps of `step`.
std::vector<double> make_age_grid(double start, double stop, double step);

/// Requires a strictly increasing, non-negative grid.
MixtureDecomposition decompose(const HazardModel& model, std::span<const double> age_grid);
MixtureDecomposition decompose(const HazardModel& model);

}  // namespace mortmix
