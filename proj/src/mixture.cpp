#include "mortmix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mortmix/errors.hpp"

namespace mortmix {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_makeham_term(const HazardModel& model, const char* what) {
  if (makeham_term(model) == 0.0) {
    throw DegenerateComponentError(std::string(what) + ": premature component is empty (c = 0, pi = 0)");
  }
}

// Survival beyond age x relative to survival at x: S(x + t) / S(x).
class ConditionalSurvival {
 public:
  ConditionalSurvival(const HazardModel& model, double x) : model_(model), x_(x), c_(makeham_term(model)) {
    if (survival(model, x) == 0.0) {
      throw TailUnderflowError("survival has underflowed at age " + std::to_string(x));
    }
    base_ = baseline_cumulative_hazard(model, x);
  }

  double operator()(double t) const {
    const double xt = x_ + t;
    if (survival(model_, xt) == 0.0) return 0.0;
    return std::exp(-(baseline_cumulative_hazard(model_, xt) - base_) - c_ * t);
  }

  // h(x + t) S(x + t) / S(x), with 0 once survival has underflowed.
  double senescent(double t) const {
    const double r = (*this)(t);
    return r == 0.0 ? 0.0 : baseline_hazard(model_, x_ + t) * r;
  }

 private:
  const HazardModel& model_;
  double x_;
  double c_;
  double base_ = 0.0;
};

double checked_ratio(double numerator, double denominator, double x) {
  if (!(denominator > 0.0) || !std::isfinite(denominator) || !std::isfinite(numerator)) {
    throw TailUnderflowError("tail mass vanished at age " + std::to_string(x));
  }
  return numerator / denominator;
}

// Log argument of the closed-form senescent mode, when the family has one.
std::optional<double> senescent_mode_argument(const HazardModel& model) {
  return std::visit(Overloaded{
                        [](const GompertzMakeham& m) -> std::optional<double> {
                          if (!(m.b > m.c)) return std::nullopt;
                          return (m.b - m.c) / m.a;
                        },
                        [](const GammaGompertzMakeham& m) -> std::optional<double> {
                          if (!(m.b > m.c) || !(m.b > m.a * m.gamma)) return std::nullopt;
                          return (m.b - m.c) * (m.b - m.a * m.gamma) / (m.a * (m.b + m.gamma * m.c));
                        },
                        [](const BeardMakeham& m) -> std::optional<double> {
                          if (!(m.b > m.c)) return std::nullopt;
                          return (m.b - m.c) / (m.a * (1.0 + m.c * m.k));
                        },
                        [](const KannistoMakeham& m) -> std::optional<double> {
                          if (!(m.b > m.c)) return std::nullopt;
                          return (m.b - m.c) / (m.a * (1.0 + m.c));
                        },
                        [](const SilerMakeham&) -> std::optional<double> { return std::nullopt; },
                    },
                    model);
}

double senescent_rate(const HazardModel& model) {
  return std::visit(Overloaded{
                        [](const SilerMakeham& m) { return m.b2; },
                        [](const auto& m) { return m.b; },
                    },
                    model);
}

// Closed-form threshold argument c/h-inverse; nullopt routes to the numeric definition.
std::optional<double> threshold_argument(const HazardModel& model) {
  return std::visit(Overloaded{
                        [](const GompertzMakeham& m) -> std::optional<double> { return m.c / m.a; },
                        [](const GammaGompertzMakeham& m) -> std::optional<double> {
                          if (!(m.b > m.a * m.gamma) || !(m.b > m.c * m.gamma)) return std::nullopt;
                          return m.c * (m.b - m.a * m.gamma) / (m.a * (m.b - m.c * m.gamma));
                        },
                        [](const BeardMakeham& m) -> std::optional<double> {
                          if (!(m.k * m.c < 1.0)) return std::nullopt;
                          return m.c / (m.a * (1.0 - m.k * m.c));
                        },
                        [](const KannistoMakeham& m) -> std::optional<double> {
                          if (!(m.c < 1.0)) return std::nullopt;
                          return m.c / (m.a * (1.0 - m.c));
                        },
                        [](const SilerMakeham&) -> std::optional<double> { return std::nullopt; },
                    },
                    model);
}

double threshold_age_numeric(const HazardModel& model) {
  const double c = makeham_term(model);
  auto gap = [&](double x) { return baseline_hazard(model, x) - c; };
  const auto steps = static_cast<int>(std::lround(kMaxSearchAge / kArgmaxGridStep));
  double hi = kMaxSearchAge;
  double g_hi = gap(hi);
  if (g_hi == 0.0) return hi;
  for (int i = steps - 1; i >= 0; --i) {
    const double lo = i * kArgmaxGridStep;
    const double g_lo = gap(lo);
    if (g_lo == 0.0) return lo;
    if (std::signbit(g_lo) != std::signbit(g_hi)) {
      return find_root(gap, lo, hi);
    }
    hi = lo;
    g_hi = g_lo;
  }
  return 0.0;
}

// Grid scan on [0, kMaxSearchAge], golden-section refinement around the best
// grid point, then (when the analytic stationarity condition changes sign in
// the refined bracket) a root polish.
template <class Density, class Stationarity>
double argmax_on_age_range(const Density& dens, const Stationarity& stationarity) {
  const auto steps = static_cast<int>(std::lround(kMaxSearchAge / kArgmaxGridStep));
  int best = 0;
  double best_value = dens(0.0);
  for (int i = 1; i <= steps; ++i) {
    const double v = dens(i * kArgmaxGridStep);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double lo = std::max(0, best - 1) * kArgmaxGridStep;
  double hi = std::min(steps, best + 1) * kArgmaxGridStep;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = dens(x1);
  double f2 = dens(x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = dens(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = dens(x1);
    }
  }
  double mode = 0.5 * (lo + hi);
  if (best == 0 && dens(mode) <= dens(0.0)) return 0.0;

  const double a = std::max(0.0, mode - 1e-6);
  const double b = mode + 1e-6;
  const double sa = stationarity(a);
  const double sb = stationarity(b);
  if (sa > 0.0 && sb < 0.0) mode = find_root(stationarity, a, b, {.tol = 1e-13, .max_iterations = 500, .observer = {}});
  return mode;
}

}  // namespace

double mixing_proportion_gm(const GompertzMakeham& m) {
  if (m.c == 0.0) return 0.0;
  const double ratio = m.c / m.b;
  const double x = m.a / m.b;
  return ratio * std::exp(ratio * std::log(x) + x) * upper_incomplete_gamma(-ratio, x);
}

double mixing_proportion_ggm(const GammaGompertzMakeham& m) {
  if (m.c == 0.0) return 0.0;
  const double inv_gamma = 1.0 / m.gamma;
  const double z = 1.0 - m.a * m.gamma / m.b;
  return m.c * m.gamma / (m.b + m.c * m.gamma) * gauss_2f1(inv_gamma, 1.0, inv_gamma + m.c / m.b + 1.0, z);
}

double mixing_proportion_by_quadrature(const HazardModel& model, const QuadratureConfig& cfg) {
  require_valid(model);
  const double c = makeham_term(model);
  if (c == 0.0) return 0.0;
  return integrate([&](double x) { return c * survival(model, x); }, 0.0, kInf, cfg);
}

MixingProportion mixing_proportion_detailed(const HazardModel& model, const QuadratureConfig& cfg) {
  require_valid(model);
  if (makeham_term(model) == 0.0) return {0.0, PiMethod::zero_makeham_term, false};

  std::optional<MixingProportion> closed;
  try {
    if (const auto* gm = std::get_if<GompertzMakeham>(&model)) {
      closed = MixingProportion{mixing_proportion_gm(*gm), PiMethod::incomplete_gamma, false};
    } else if (const auto* ggm = std::get_if<GammaGompertzMakeham>(&model)) {
      closed = MixingProportion{mixing_proportion_ggm(*ggm), PiMethod::hypergeometric, false};
    }
  } catch (const DomainError&) {
    return {mixing_proportion_by_quadrature(model, cfg), PiMethod::quadrature, true};
  } catch (const ConvergenceError&) {
    return {mixing_proportion_by_quadrature(model, cfg), PiMethod::quadrature, true};
  }
  if (closed) {
    if (std::isfinite(closed->value) && closed->value >= 0.0 && closed->value <= 1.0) return *closed;
    return {mixing_proportion_by_quadrature(model, cfg), PiMethod::quadrature, true};
  }
  return {mixing_proportion_by_quadrature(model, cfg), PiMethod::quadrature, false};
}

double mixing_proportion(const HazardModel& model) { return mixing_proportion_detailed(model).value; }

MakehamMixture::MakehamMixture(HazardModel model, const QuadratureConfig& cfg)
    : model_(std::move(model)), pi_(mixing_proportion_detailed(model_, cfg)) {}

bool MakehamMixture::has_component(Component component) const noexcept {
  return component == Component::premature ? pi_.value > 0.0 : pi_.value < 1.0;
}

double MakehamMixture::component_density(Component component, double x) const {
  if (!has_component(component)) {
    throw DegenerateComponentError(component == Component::premature
                                       ? "premature component density undefined: pi = 0"
                                       : "senescent component density undefined: pi = 1");
  }
  const double s = survival(model_, x);
  if (s == 0.0) return 0.0;
  if (component == Component::premature) return makeham_term(model_) * s / pi_.value;
  return baseline_hazard(model_, x) * s / (1.0 - pi_.value);
}

double component_density(const HazardModel& model, Component component, double x) {
  return MakehamMixture(model).component_density(component, x);
}

double threshold_age(const HazardModel& model) {
  require_valid(model);
  const double c = makeham_term(model);
  if (c == 0.0) return 0.0;
  if (const auto arg = threshold_argument(model)) {
    return *arg >= 1.0 ? std::log(*arg) / senescent_rate(model) : 0.0;
  }
  return threshold_age_numeric(model);
}

double premature_prevalence(const HazardModel& model, double x) {
  const double c = makeham_term(model);
  if (c == 0.0) return 0.0;
  const double h = baseline_hazard(model, x);
  if (std::isinf(h)) return 0.0;
  return c / (h + c);
}

double conditional_hazard(const HazardModel& model, Subpopulation subpop, double x, const QuadratureConfig& cfg) {
  require_valid(model);
  switch (subpop) {
    case Subpopulation::overall:
      return total_hazard(model, x);
    case Subpopulation::premature: {
      require_makeham_term(model, "conditional_hazard");
      const ConditionalSurvival r(model, x);
      return checked_ratio(1.0, integrate(r, 0.0, kInf, cfg), x);
    }
    case Subpopulation::senescent: {
      const ConditionalSurvival r(model, x);
      const double tail = integrate([&](double t) { return r.senescent(t); }, 0.0, kInf, cfg);
      return checked_ratio(baseline_hazard(model, x), tail, x);
    }
  }
  throw std::invalid_argument("conditional_hazard: unknown subpopulation");
}

double conditional_hazard_premature(const HazardModel& model, double x, const QuadratureConfig& cfg) {
  return conditional_hazard(model, Subpopulation::premature, x, cfg);
}

double remaining_life_expectancy(const HazardModel& model, double x, Subpopulation subpop,
                                 const QuadratureConfig& cfg) {
  require_valid(model);
  // With g_j(x + t) proportional to w(t) S(x + t), integration by parts gives
  // int_x^inf S(t|j) dt / S(x|j) = int t w S / int w S.
  switch (subpop) {
    case Subpopulation::overall: {
      const ConditionalSurvival r(model, x);
      return checked_ratio(integrate(r, 0.0, kInf, cfg), 1.0, x);
    }
    case Subpopulation::premature: {
      require_makeham_term(model, "remaining_life_expectancy");
      const ConditionalSurvival r(model, x);
      const double mass = integrate(r, 0.0, kInf, cfg);
      const double moment = integrate([&](double t) { return t * r(t); }, 0.0, kInf, cfg);
      return checked_ratio(moment, mass, x);
    }
    case Subpopulation::senescent: {
      const ConditionalSurvival r(model, x);
      const double mass = integrate([&](double t) { return r.senescent(t); }, 0.0, kInf, cfg);
      const double moment = integrate([&](double t) { return t * r.senescent(t); }, 0.0, kInf, cfg);
      return checked_ratio(moment, mass, x);
    }
  }
  throw std::invalid_argument("remaining_life_expectancy: unknown subpopulation");
}

std::optional<double> senescent_modal_age_closed_form(const HazardModel& model) {
  require_valid(model);
  const auto arg = senescent_mode_argument(model);
  if (!arg || !(*arg > 1.0)) return std::nullopt;
  return std::log(*arg) / senescent_rate(model);
}

double modal_age_numeric(const HazardModel& model, Subpopulation subpop) {
  require_valid(model);
  const double c = makeham_term(model);
  switch (subpop) {
    case Subpopulation::premature:
      require_makeham_term(model, "modal_age");
      return argmax_on_age_range([&](double x) { return survival(model, x); },
                                 [](double) { return -1.0; });
    case Subpopulation::senescent:
      return argmax_on_age_range(
          [&](double x) {
            const double s = survival(model, x);
            return s == 0.0 ? 0.0 : baseline_hazard(model, x) * s;
          },
          [&](double x) {
            const double h = baseline_hazard(model, x);
            return baseline_hazard_derivative(model, x) - h * (h + c);
          });
    case Subpopulation::overall:
      return argmax_on_age_range([&](double x) { return density(model, x); },
                                 [&](double x) {
                                   const double mu = total_hazard(model, x);
                                   return baseline_hazard_derivative(model, x) - mu * mu;
                                 });
  }
  throw std::invalid_argument("modal_age: unknown subpopulation");
}

double modal_age(const HazardModel& model, Subpopulation subpop) {
  require_valid(model);
  switch (subpop) {
    case Subpopulation::premature:
      // g1 is proportional to S(x), which is strictly decreasing.
      require_makeham_term(model, "modal_age");
      return 0.0;
    case Subpopulation::senescent:
      if (const auto closed = senescent_modal_age_closed_form(model)) return *closed;
      return modal_age_numeric(model, subpop);
    case Subpopulation::overall:
      return modal_age_numeric(model, subpop);
  }
  throw std::invalid_argument("modal_age: unknown subpopulation");
}

std::vector<double> make_age_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start) || !(start >= 0.0)) {
    throw std::invalid_argument("make_age_grid: need 0 <= start <= stop and step > 0");
  }
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = start + static_cast<double>(i) * step;
  return grid;
}

std::vector<double> default_age_grid() { return make_age_grid(0.0, 110.0, 0.5); }

MixtureDecomposition decompose(const HazardModel& model, std::span<const double> age_grid) {
  require_valid(model);
  for (std::size_t i = 0; i < age_grid.size(); ++i) {
    if (!(age_grid[i] >= 0.0) || (i > 0 && !(age_grid[i] > age_grid[i - 1]))) {
      throw std::invalid_argument("decompose: age grid must be non-negative and strictly increasing");
    }
  }

  const MakehamMixture mixture(model);
  const bool has_premature = mixture.has_component(Component::premature);
  const bool has_senescent = mixture.has_component(Component::senescent);

  MixtureDecomposition out;
  out.pi = mixture.pi();
  out.threshold_age = threshold_age(model);
  out.modal_age_overall = modal_age(model, Subpopulation::overall);
  out.modal_age_senescent = modal_age(model, Subpopulation::senescent);
  if (has_premature) out.modal_age_premature = modal_age(model, Subpopulation::premature);
  out.life_expectancy = remaining_life_expectancy(model, 0.0, Subpopulation::overall);

  out.prevalence_grid.reserve(age_grid.size());
  out.component_density_grid.reserve(age_grid.size());
  for (double x : age_grid) {
    out.prevalence_grid.push_back({x, premature_prevalence(model, x)});
    ComponentDensityPoint point{x, std::nullopt, std::nullopt, mixture.total_density(x)};
    if (has_premature) point.g1 = mixture.premature_density(x);
    if (has_senescent) point.g2 = mixture.senescent_density(x);
    out.component_density_grid.push_back(point);
  }
  return out;
}

MixtureDecomposition decompose(const HazardModel& model) {
  const auto grid = default_age_grid();
  return decompose(model, grid);
}

}  // namespace mortmix
