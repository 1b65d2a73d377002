#include "mortmix/hazard_models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mortmix/errors.hpp"

namespace mortmix {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Above this exponent log1p(s * expm1(bx)) is rewritten as bx + log(...) so the
// bounded-hazard families never form e^{bx}.
constexpr double kLargeExponent = 30.0;

void check_age(double x) {
  if (!(x >= 0.0)) {
    throw DomainError("age must be >= 0, got " + std::to_string(x));
  }
}

BeardMakeham as_beard(const KannistoMakeham& m) { return {m.a, m.b, 1.0, m.c}; }

double hazard_of(const GompertzMakeham& m, double x) { return m.a * std::exp(m.b * x); }

double hazard_of(const GammaGompertzMakeham& m, double x) {
  const double s = m.a * m.gamma / m.b;
  const double e = std::exp(-m.b * x);
  return m.a / (e + s * (1.0 - e));
}

double hazard_of(const BeardMakeham& m, double x) { return m.a / (std::exp(-m.b * x) + m.k * m.a); }

double hazard_of(const KannistoMakeham& m, double x) { return hazard_of(as_beard(m), x); }

double hazard_of(const SilerMakeham& m, double x) {
  return m.a1 * std::exp(-m.b1 * x) + m.a2 * std::exp(m.b2 * x);
}

double derivative_of(const GompertzMakeham& m, double x) { return m.b * hazard_of(m, x); }

double derivative_of(const GammaGompertzMakeham& m, double x) {
  const double h = hazard_of(m, x);
  return h * (m.b - m.gamma * h);
}

double derivative_of(const BeardMakeham& m, double x) {
  const double h = hazard_of(m, x);
  return m.b * h * (1.0 - m.k * h);
}

double derivative_of(const KannistoMakeham& m, double x) { return derivative_of(as_beard(m), x); }

double derivative_of(const SilerMakeham& m, double x) {
  return -m.a1 * m.b1 * std::exp(-m.b1 * x) + m.a2 * m.b2 * std::exp(m.b2 * x);
}

double cumulative_of(const GompertzMakeham& m, double x) { return m.a / m.b * std::expm1(m.b * x); }

double cumulative_of(const GammaGompertzMakeham& m, double x) {
  const double s = m.a * m.gamma / m.b;
  const double bx = m.b * x;
  if (bx <= kLargeExponent) {
    return std::log1p(s * std::expm1(bx)) / m.gamma;
  }
  return (bx + std::log(s + (1.0 - s) * std::exp(-bx))) / m.gamma;
}

double cumulative_of(const BeardMakeham& m, double x) {
  const double ka = m.k * m.a;
  const double bx = m.b * x;
  double log_ratio;
  if (bx <= kLargeExponent) {
    log_ratio = std::log1p(ka * std::exp(bx)) - std::log1p(ka);
  } else {
    log_ratio = bx + std::log(ka + std::exp(-bx)) - std::log1p(ka);
  }
  return log_ratio / (m.b * m.k);
}

double cumulative_of(const KannistoMakeham& m, double x) { return cumulative_of(as_beard(m), x); }

double cumulative_of(const SilerMakeham& m, double x) {
  return -m.a1 / m.b1 * std::expm1(-m.b1 * x) + m.a2 / m.b2 * std::expm1(m.b2 * x);
}

// Exponent of the unbounded exponential term, if the family has one.
double growth_exponent(const HazardModel& model, double x) {
  return std::visit(Overloaded{
                        [x](const GompertzMakeham& m) { return m.b * x; },
                        [x](const SilerMakeham& m) { return m.b2 * x; },
                        [](const auto&) { return 0.0; },
                    },
                    model);
}

void require_positive(std::vector<std::string>& out, const char* name, double v) {
  if (!std::isfinite(v)) {
    out.push_back(std::string(name) + " must be finite");
  } else if (!(v > 0.0)) {
    out.push_back(std::string(name) + " must be > 0");
  }
}

void require_non_negative(std::vector<std::string>& out, const char* name, double v) {
  if (!std::isfinite(v)) {
    out.push_back(std::string(name) + " must be finite");
  } else if (!(v >= 0.0)) {
    out.push_back(std::string(name) + " must be >= 0");
  }
}

}  // namespace

Family family_of(const HazardModel& model) {
  return std::visit(Overloaded{
                        [](const GompertzMakeham&) { return Family::gompertz_makeham; },
                        [](const GammaGompertzMakeham&) { return Family::gamma_gompertz_makeham; },
                        [](const BeardMakeham&) { return Family::beard_makeham; },
                        [](const KannistoMakeham&) { return Family::kannisto_makeham; },
                        [](const SilerMakeham&) { return Family::siler; },
                    },
                    model);
}

std::string_view family_tag(Family family) {
  switch (family) {
    case Family::gompertz_makeham:
      return "gm";
    case Family::gamma_gompertz_makeham:
      return "ggm";
    case Family::beard_makeham:
      return "beard";
    case Family::kannisto_makeham:
      return "kannisto";
    case Family::siler:
      return "siler";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view tag) {
  for (Family f : {Family::gompertz_makeham, Family::gamma_gompertz_makeham, Family::beard_makeham,
                   Family::kannisto_makeham, Family::siler}) {
    if (family_tag(f) == tag) return f;
  }
  return std::nullopt;
}

std::vector<std::string> parameter_names(Family family) {
  switch (family) {
    case Family::gompertz_makeham:
    case Family::kannisto_makeham:
      return {"a", "b", "c"};
    case Family::gamma_gompertz_makeham:
      return {"a", "b", "gamma", "c"};
    case Family::beard_makeham:
      return {"a", "b", "k", "c"};
    case Family::siler:
      return {"a1", "b1", "a2", "b2", "c"};
  }
  return {};
}

std::vector<double> parameters(const HazardModel& model) {
  return std::visit(Overloaded{
                        [](const GompertzMakeham& m) { return std::vector<double>{m.a, m.b, m.c}; },
                        [](const GammaGompertzMakeham& m) {
                          return std::vector<double>{m.a, m.b, m.gamma, m.c};
                        },
                        [](const BeardMakeham& m) { return std::vector<double>{m.a, m.b, m.k, m.c}; },
                        [](const KannistoMakeham& m) { return std::vector<double>{m.a, m.b, m.c}; },
                        [](const SilerMakeham& m) {
                          return std::vector<double>{m.a1, m.b1, m.a2, m.b2, m.c};
                        },
                    },
                    model);
}

HazardModel make_model(Family family, std::span<const double> v) {
  if (v.size() != parameter_names(family).size()) {
    throw std::invalid_argument("make_model: expected " + std::to_string(parameter_names(family).size()) +
                                " parameters for " + std::string(family_tag(family)) + ", got " +
                                std::to_string(v.size()));
  }
  switch (family) {
    case Family::gompertz_makeham:
      return GompertzMakeham{v[0], v[1], v[2]};
    case Family::gamma_gompertz_makeham:
      return GammaGompertzMakeham{v[0], v[1], v[2], v[3]};
    case Family::beard_makeham:
      return BeardMakeham{v[0], v[1], v[2], v[3]};
    case Family::kannisto_makeham:
      return KannistoMakeham{v[0], v[1], v[2]};
    case Family::siler:
      return SilerMakeham{v[0], v[1], v[2], v[3], v[4]};
  }
  throw std::invalid_argument("make_model: unknown family");
}

double makeham_term(const HazardModel& model) {
  return std::visit([](const auto& m) { return m.c; }, model);
}

ValidationReport validate(const HazardModel& model) {
  ValidationReport report;
  auto& out = report.violations;
  std::visit(Overloaded{
                 [&](const GompertzMakeham& m) {
                   require_positive(out, "a", m.a);
                   require_positive(out, "b", m.b);
                   require_non_negative(out, "c", m.c);
                 },
                 [&](const GammaGompertzMakeham& m) {
                   require_positive(out, "a", m.a);
                   require_positive(out, "b", m.b);
                   require_positive(out, "gamma", m.gamma);
                   require_non_negative(out, "c", m.c);
                 },
                 [&](const BeardMakeham& m) {
                   require_positive(out, "a", m.a);
                   require_positive(out, "b", m.b);
                   require_positive(out, "k", m.k);
                   require_non_negative(out, "c", m.c);
                 },
                 [&](const KannistoMakeham& m) {
                   require_positive(out, "a", m.a);
                   require_positive(out, "b", m.b);
                   require_non_negative(out, "c", m.c);
                 },
                 [&](const SilerMakeham& m) {
                   require_positive(out, "a1", m.a1);
                   require_positive(out, "b1", m.b1);
                   require_positive(out, "a2", m.a2);
                   require_positive(out, "b2", m.b2);
                   require_non_negative(out, "c", m.c);
                 },
             },
             model);
  return report;
}

void require_valid(const HazardModel& model) {
  const auto report = validate(model);
  if (report.ok()) return;
  std::ostringstream msg;
  msg << "invalid " << family_tag(family_of(model)) << " model:";
  for (const auto& v : report.violations) msg << ' ' << v << ';';
  throw std::invalid_argument(msg.str());
}

double baseline_hazard(const HazardModel& model, double x) {
  check_age(x);
  return std::visit([x](const auto& m) { return hazard_of(m, x); }, model);
}

double baseline_hazard_derivative(const HazardModel& model, double x) {
  check_age(x);
  return std::visit([x](const auto& m) { return derivative_of(m, x); }, model);
}

double baseline_cumulative_hazard(const HazardModel& model, double x) {
  check_age(x);
  return std::visit([x](const auto& m) { return cumulative_of(m, x); }, model);
}

double total_hazard(const HazardModel& model, double x) {
  return baseline_hazard(model, x) + makeham_term(model);
}

double cumulative_hazard(const HazardModel& model, double x) {
  return baseline_cumulative_hazard(model, x) + makeham_term(model) * x;
}

double survival(const HazardModel& model, double x) {
  check_age(x);
  if (growth_exponent(model, x) > kOverflowExponent) return 0.0;
  return std::exp(-cumulative_hazard(model, x));
}

double density(const HazardModel& model, double x) {
  const double s = survival(model, x);
  if (s == 0.0) return 0.0;
  return total_hazard(model, x) * s;
}

}  // namespace mortmix
