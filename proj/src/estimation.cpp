#include "mortmix/estimation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "mortmix/errors.hpp"

namespace mortmix {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SimplexRun {
  std::vector<double> best;
  double value = kInf;
  bool converged = false;
  std::size_t iterations = 0;
};

// Nelder-Mead with standard coefficients (reflection 1, expansion 2,
// contraction 1/2, shrink 1/2). `size` measures the simplex diameter.
template <class Objective, class Size>
SimplexRun nelder_mead(const Objective& objective, std::vector<double> start, const std::vector<double>& steps,
                       std::size_t max_iterations, double tol, const Size& size) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += steps[i];
  for (std::size_t i = 0; i <= n; ++i) values[i] = objective(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n);
  std::vector<double> trial(n);
  std::vector<double> trial2(n);
  auto point = [&](double t, const std::vector<double>& worst, std::vector<double>& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (worst[j] - centroid[j]);
  };

  SimplexRun run;
  for (run.iterations = 0; run.iterations < max_iterations; ++run.iterations) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
    const auto& best = simplex[order.front()];
    if (std::isfinite(values[order.front()]) && size(simplex, best) < tol) {
      run.converged = true;
      break;
    }

    const std::size_t worst_i = order.back();
    const std::size_t second_i = order[n - 1];
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[order[i]][j] / static_cast<double>(n);
    }
    const auto& worst = simplex[worst_i];

    point(-1.0, worst, trial);
    const double f_reflect = objective(trial);
    if (f_reflect < values[order.front()]) {
      point(-2.0, worst, trial2);
      const double f_expand = objective(trial2);
      if (f_expand < f_reflect) {
        simplex[worst_i] = trial2;
        values[worst_i] = f_expand;
      } else {
        simplex[worst_i] = trial;
        values[worst_i] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[second_i]) {
      simplex[worst_i] = trial;
      values[worst_i] = f_reflect;
      continue;
    }
    const bool outside = f_reflect < values[worst_i];
    point(outside ? -0.5 : 0.5, worst, trial2);
    const double f_contract = objective(trial2);
    if (f_contract < (outside ? f_reflect : values[worst_i])) {
      simplex[worst_i] = trial2;
      values[worst_i] = f_contract;
      continue;
    }
    const auto anchor = simplex[order.front()];
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == order.front()) continue;
      for (std::size_t j = 0; j < n; ++j) simplex[i][j] = anchor[j] + 0.5 * (simplex[i][j] - anchor[j]);
      values[i] = objective(simplex[i]);
    }
  }

  const auto best_i = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  run.best = simplex[best_i];
  run.value = values[best_i];
  return run;
}

double radical_inverse(std::size_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

// Halton points with a Cranley-Patterson rotation drawn from the seed.
std::vector<std::vector<double>> start_points(std::size_t count, std::size_t dims, std::uint64_t seed) {
  constexpr std::array<unsigned, 8> primes = {2, 3, 5, 7, 11, 13, 17, 19};
  if (dims > primes.size()) throw std::invalid_argument("start_points: too many dimensions");
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(dims);
  for (auto& s : shift) s = unit(engine);

  std::vector<std::vector<double>> points(count, std::vector<double>(dims));
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t d = 0; d < dims; ++d) {
      const double v = radical_inverse(k + 1, primes[d]) + shift[d];
      points[k][d] = v - std::floor(v);
    }
  }
  return points;
}

struct Problem {
  Family family;
  std::vector<std::string> names;
  std::vector<std::size_t> free;  // indices into names
  std::vector<double> fixed_values;  // full-length, used for fixed entries
};

Problem make_problem(Family family, const FitOptions& options) {
  Problem p{family, parameter_names(family), {}, {}};
  p.fixed_values.assign(p.names.size(), 0.0);
  for (std::size_t i = 0; i < p.names.size(); ++i) {
    if (auto it = options.fixed.find(p.names[i]); it != options.fixed.end()) {
      p.fixed_values[i] = it->second;
    } else {
      p.free.push_back(i);
    }
  }
  for (const auto& [name, value] : options.fixed) {
    if (std::find(p.names.begin(), p.names.end(), name) == p.names.end()) {
      throw std::invalid_argument("fit_map: unknown fixed parameter '" + name + "'");
    }
  }
  if (p.free.empty()) throw std::invalid_argument("fit_map: every parameter is fixed");
  return p;
}

std::vector<double> full_parameters(const Problem& p, std::span<const double> free_values) {
  std::vector<double> full = p.fixed_values;
  for (std::size_t i = 0; i < p.free.size(); ++i) full[p.free[i]] = free_values[i];
  return full;
}

}  // namespace

std::string_view sex_tag(Sex sex) {
  switch (sex) {
    case Sex::female:
      return "female";
    case Sex::male:
      return "male";
    case Sex::total:
      return "total";
  }
  return "unknown";
}

std::optional<Sex> parse_sex(std::string_view tag) {
  for (Sex s : {Sex::female, Sex::male, Sex::total}) {
    if (sex_tag(s) == tag) return s;
  }
  return std::nullopt;
}

void validate(const LifeTableSlice& slice) {
  for (std::size_t i = 0; i < slice.rows.size(); ++i) {
    const auto& r = slice.rows[i];
    if (i > 0 && !(r.age > slice.rows[i - 1].age)) {
      throw std::invalid_argument("life table ages must be strictly increasing");
    }
    if (!(r.exposure > 0.0) || !std::isfinite(r.exposure)) {
      throw std::invalid_argument("exposure at age " + std::to_string(r.age) + " must be > 0");
    }
    if (!(r.deaths >= 0.0) || !std::isfinite(r.deaths)) {
      throw std::invalid_argument("deaths at age " + std::to_string(r.age) + " must be >= 0");
    }
  }
}

double InverseGammaPrior::log_density(double theta) const {
  if (!(theta > 0.0)) throw DomainError("inverse-gamma prior needs a positive parameter");
  return -(alpha + 1.0) * std::log(theta) - beta / theta;
}

PriorSpec PriorSpec::standard() { return PriorSpec{InverseGammaPrior{1.0, 1.0}, {}}; }

PriorSpec PriorSpec::flat() { return PriorSpec{}; }

const InverseGammaPrior* PriorSpec::lookup(const std::string& name) const {
  if (auto it = per_parameter.find(name); it != per_parameter.end()) return &it->second;
  return default_prior ? &*default_prior : nullptr;
}

double poisson_loglik(const HazardModel& model, const LifeTableSlice& data) {
  if (data.rows.empty()) throw std::invalid_argument("poisson_loglik: empty life table");
  double sum = 0.0;
  for (const auto& row : data.rows) {
    const double mu = total_hazard(model, row.age + 0.5);
    if (!(mu > 0.0) || !std::isfinite(mu)) {
      throw DomainError("poisson_loglik: hazard is not positive and finite at age " + std::to_string(row.age));
    }
    const double expected = row.exposure * mu;
    sum += row.deaths > 0.0 ? row.deaths * std::log(expected / row.deaths) - (expected - row.deaths) : -expected;
  }
  return sum;
}

double log_prior(const HazardModel& model, const PriorSpec& priors) {
  const auto names = parameter_names(family_of(model));
  const auto values = parameters(model);
  double sum = 0.0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (const auto* prior = priors.lookup(names[i])) sum += prior->log_density(values[i]);
  }
  return sum;
}

double log_posterior(const HazardModel& model, const LifeTableSlice& data, const PriorSpec& priors) {
  return poisson_loglik(model, data) + log_prior(model, priors);
}

SearchRange default_search_range(const std::string& parameter) {
  if (parameter == "a" || parameter == "a2") return {1e-6, 1e-2};
  if (parameter == "b" || parameter == "b2") return {0.05, 0.2};
  if (parameter == "c") return {1e-5, 0.05};
  if (parameter == "gamma") return {1e-3, 1.0};
  if (parameter == "k") return {1e-2, 5.0};
  if (parameter == "a1") return {1e-4, 0.5};
  if (parameter == "b1") return {0.1, 3.0};
  throw std::invalid_argument("no search range for parameter '" + parameter + "'");
}

FitResult fit_map(const LifeTableSlice& input, Family family, const PriorSpec& priors, const FitOptions& options) {
  LifeTableSlice data = input;
  std::sort(data.rows.begin(), data.rows.end(),
            [](const LifeTableRow& l, const LifeTableRow& r) { return l.age < r.age; });
  validate(data);
  const Problem problem = make_problem(family, options);
  const std::size_t dims = problem.free.size();
  if (data.rows.size() < 2 * dims) {
    throw std::invalid_argument("fit_map: " + std::to_string(data.rows.size()) + " rows for " +
                                std::to_string(dims) + " free parameters (need at least twice as many)");
  }
  if (data.rows.front().age < options.min_age) {
    throw std::invalid_argument("fit_map: age " + std::to_string(data.rows.front().age) +
                                " is below the minimum age " + std::to_string(options.min_age));
  }

  const bool log_space = options.space == ParameterSpace::log;
  auto to_natural = [&](std::span<const double> z) {
    std::vector<double> theta(z.begin(), z.end());
    if (log_space) {
      for (auto& v : theta) v = std::exp(v);
    }
    return theta;
  };
  auto objective = [&](const std::vector<double>& z) {
    const auto theta = to_natural(z);
    for (double v : theta) {
      if (!(v > 0.0) || !std::isfinite(v)) return kInf;
    }
    const auto full = full_parameters(problem, theta);
    const HazardModel model = make_model(family, full);
    if (!validate(model).ok()) return kInf;
    try {
      const double lp = log_posterior(model, data, priors);
      return std::isfinite(lp) ? -lp : kInf;
    } catch (const DomainError&) {
      return kInf;
    }
  };
  auto simplex_size = [&](const std::vector<std::vector<double>>& simplex, const std::vector<double>& best) {
    double size = 0.0;
    for (const auto& v : simplex) {
      for (std::size_t j = 0; j < dims; ++j) {
        const double diff = std::abs(v[j] - best[j]);
        size = std::max(size, log_space ? diff : diff / std::max(std::abs(best[j]), 1e-300));
      }
    }
    return size;
  };
  auto steps_for = [&](const std::vector<double>& z, double scale) {
    std::vector<double> steps(dims);
    for (std::size_t j = 0; j < dims; ++j) steps[j] = log_space ? scale : scale * std::abs(z[j]);
    return steps;
  };

  std::vector<std::vector<double>> starts;
  if (options.initial) {
    if (options.initial->size() != problem.names.size()) {
      throw std::invalid_argument("fit_map: initial point has the wrong number of parameters");
    }
    std::vector<double> z;
    for (std::size_t idx : problem.free) z.push_back((*options.initial)[idx]);
    starts.push_back(z);
  }
  for (const auto& u : start_points(options.starts, dims, options.seed)) {
    std::vector<double> z(dims);
    for (std::size_t j = 0; j < dims; ++j) {
      const auto range = default_search_range(problem.names[problem.free[j]]);
      z[j] = range.lo * std::pow(range.hi / range.lo, u[j]);
    }
    starts.push_back(z);
  }
  if (log_space) {
    for (auto& z : starts) {
      for (auto& v : z) v = std::log(v);
    }
  }

  std::optional<SimplexRun> best_converged;
  std::optional<SimplexRun> best_any;
  std::size_t total_iterations = 0;
  for (const auto& start : starts) {
    SimplexRun run = nelder_mead(objective, start, steps_for(start, 0.1), options.max_iterations,
                                 options.simplex_tol, simplex_size);
    std::size_t used = run.iterations;
    // Restart from the optimum until a fresh simplex no longer improves it;
    // guards against premature collapse in the flat c direction.
    while (run.converged && used < options.max_iterations) {
      SimplexRun again = nelder_mead(objective, run.best, steps_for(run.best, 0.05), options.max_iterations - used,
                                     options.simplex_tol, simplex_size);
      used += again.iterations;
      const bool improved = again.value < run.value - 1e-12 * (1.0 + std::abs(run.value));
      if (again.value <= run.value) {
        run.best = again.best;
        run.value = again.value;
      }
      run.converged = again.converged;
      if (!improved) break;
    }
    run.iterations = used;
    total_iterations += used;
    if (!best_any || run.value < best_any->value) best_any = run;
    if (run.converged && (!best_converged || run.value < best_converged->value)) best_converged = run;
  }

  const SimplexRun& winner = best_converged ? *best_converged : *best_any;
  FitResult result;
  result.population = data.population;
  result.year = data.year;
  result.sex = data.sex;
  result.model = make_model(family, full_parameters(problem, to_natural(winner.best)));
  result.converged = winner.converged;
  result.iterations = total_iterations;
  result.start_points_tried = starts.size();

  if (!std::isfinite(winner.value)) {
    throw NonConvergenceError("fit_map: no start point produced a finite log-posterior", result);
  }
  result.log_posterior = -winner.value;
  result.log_likelihood = poisson_loglik(result.model, data);
  if (!best_converged) {
    throw NonConvergenceError("fit_map: none of " + std::to_string(starts.size()) + " start points converged within " +
                                  std::to_string(options.max_iterations) + " iterations",
                              result);
  }
  result.derived = decompose(result.model);
  return result;
}

SeriesResult fit_series(std::span<const LifeTableSlice> panel, Family family, const PriorSpec& priors,
                        const FitOptions& options) {
  std::vector<std::optional<FitResult>> fits(panel.size());
  std::vector<std::optional<std::string>> failures(panel.size());
  auto run = [&](std::size_t i) {
    try {
      fits[i] = fit_map(panel[i], family, priors, options);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  };

  const std::size_t workers = std::min(std::max<std::size_t>(options.threads, 1), panel.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < panel.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < panel.size(); i = next++) run(i);
      });
    }
  }

  SeriesResult out;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    if (fits[i]) {
      out.results.push_back(std::move(*fits[i]));
    } else {
      out.errors.push_back({i, panel[i].population, panel[i].year, panel[i].sex, failures[i].value_or("unknown error")});
    }
  }
  return out;
}

}  // namespace mortmix
