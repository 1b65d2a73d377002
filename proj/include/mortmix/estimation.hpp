#pragma once

// MAP fitting of Makeham-family models to death counts and exposures:
// Poisson likelihood for deaths with mean E * mu(x + 1/2), inverse-gamma
// priors on every parameter, Nelder-Mead with deterministic multistart.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mortmix/hazard_models.hpp"
#include "mortmix/mixture.hpp"

namespace mortmix {

enum class Sex { female, male, total };

std::string_view sex_tag(Sex sex);
std::optional<Sex> parse_sex(std::string_view tag);

struct LifeTableRow {
  int age = 0;          // start of the single-year interval [age, age + 1)
  double deaths = 0.0;  // may be fractional
  double exposure = 0.0;
};

struct LifeTableSlice {
  std::string population;
  int year = 0;
  Sex sex = Sex::total;
  std::vector<LifeTableRow> rows;
  /// Input rows dropped while building the slice (missing values, zero exposure).
  std::size_t excluded_rows = 0;
};

/// Throws std::invalid_argument when ages are not strictly increasing,
/// an exposure is not > 0, or a death count is negative.
void validate(const LifeTableSlice& slice);

struct InverseGammaPrior {
  double alpha = 1.0;  // shape
  double beta = 1.0;   // scale

  /// log density up to a constant: -(alpha + 1) ln theta - beta / theta.
  double log_density(double theta) const;
  double mode() const { return beta / (alpha + 1.0); }
};

struct PriorSpec {
  /// Applied to every parameter without an explicit entry; none means flat.
  std::optional<InverseGammaPrior> default_prior;
  std::map<std::string, InverseGammaPrior> per_parameter;

  /// InverseGamma(1, 1) on every parameter.
  static PriorSpec standard();
  /// No prior terms: the posterior is the likelihood.
  static PriorSpec flat();

  const InverseGammaPrior* lookup(const std::string& name) const;
};

/// sum over rows of D ln(E mu / D) - (E mu - D), with mu at the interval
/// midpoint age + 1/2 and the D = 0 term reducing to -E mu. Differs from
/// sum [D ln(E mu) - E mu] only by a data-only constant; anchoring at the
/// saturated model keeps the sum small so optimiser comparisons stay precise.
double poisson_loglik(const HazardModel& model, const LifeTableSlice& data);

/// Sum of inverse-gamma log densities; throws DomainError on a non-positive parameter.
double log_prior(const HazardModel& model, const PriorSpec& priors);
double log_posterior(const HazardModel& model, const LifeTableSlice& data, const PriorSpec& priors);

enum class ParameterSpace { log, linear };

struct SearchRange {
  double lo;
  double hi;
};

/// Multistart ranges per parameter name (a, b, c, gamma, k, a1, b1, a2, b2).
SearchRange default_search_range(const std::string& parameter);

struct FitOptions {
  int min_age = 20;
  std::uint64_t seed = 0;
  std::size_t starts = 16;
  std::size_t max_iterations = 2000;
  /// Simplex diameter (log-space, or relative in linear space) for convergence.
  double simplex_tol = 1e-8;
  ParameterSpace space = ParameterSpace::log;
  /// Extra start tried before the low-discrepancy points.
  std::optional<std::vector<double>> initial;
  /// Parameters held fixed at the given value, by name.
  std::map<std::string, double> fixed;
  /// Worker threads for fit_series.
  std::size_t threads = 1;
};

struct FitResult {
  std::string population;
  int year = 0;
  Sex sex = Sex::total;
  HazardModel model;
  double log_posterior = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t start_points_tried = 0;
  MixtureDecomposition derived;
};

/// Thrown by fit_map when no start converges; carries the best incumbent.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, FitResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const FitResult& best() const noexcept { return best_; }

 private:
  FitResult best_;
};

/// Maximises the log-posterior. Rows are sorted by age first, so the result
/// does not depend on row order. Deterministic for a given options.seed.
/// Requires every age >= options.min_age and at least 2x as many rows as
/// free parameters.
FitResult fit_map(const LifeTableSlice& data, Family family, const PriorSpec& priors, const FitOptions& options = {});

struct SliceError {
  std::size_t index = 0;  // position in the panel
  std::string population;
  int year = 0;
  Sex sex = Sex::total;
  std::string message;
};

struct SeriesResult {
  std::vector<FitResult> results;  // in panel order, failed slices omitted
  std::vector<SliceError> errors;
};

/// fit_map on every slice independently; failures are collected per slice.
SeriesResult fit_series(std::span<const LifeTableSlice> panel, Family family, const PriorSpec& priors,
                        const FitOptions& options = {});

}  // namespace mortmix
