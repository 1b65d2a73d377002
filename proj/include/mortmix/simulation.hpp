#pragma once

// Competing-risk Monte Carlo: each individual draws an independent failure
// time per cause, dies at the minimum, and records which cause struck.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mortmix/hazard_models.hpp"

namespace mortmix {

/// Draws beyond this age are right-censored.
inline constexpr double kCensoringAge = 500.0;

struct CauseSpec {
  std::string label;
  /// H_j(x): 0 at 0, non-decreasing.
  std::function<double(double)> cumulative_hazard;
  /// H_j^{-1}; when absent the inverse is found numerically.
  std::function<double(double)> inverse_cumulative_hazard;
};

CauseSpec exponential_cause(std::string label, double rate);
CauseSpec gompertz_cause(std::string label, double a, double b);
/// Senescent baseline h(x) of a Makeham model as a cause of its own.
/// Closed-form inverse for gm, ggm, beard and kannisto; numeric for siler.
CauseSpec baseline_cause(std::string label, const HazardModel& model);
/// {premature: exponential(c), senescent: baseline}. Requires c > 0.
std::vector<CauseSpec> makeham_causes(const HazardModel& model);

struct FailureDraw {
  double age = 0.0;
  bool censored = false;  // true draw exceeds kCensoringAge; age is then kCensoringAge
};

/// Inverse-transform draw, T = H^{-1}(-ln u). Requires u in (0, 1).
FailureDraw sample_failure_time(const CauseSpec& cause, double u);

struct LifetimeSample {
  double y = 0.0;
  /// Index into the cause list of the cause that struck first; absent when
  /// every cause was censored (y is then kCensoringAge).
  std::optional<std::size_t> cause;
  bool censored() const noexcept { return !cause.has_value(); }
};

struct SimulationOptions {
  std::size_t threads = 1;
  /// Samples per independent random stream. Streams are seeded from
  /// (seed, shard index), so results do not depend on `threads`.
  std::size_t shard_size = 1 << 16;
};

/// n lifetimes, each the minimum of independent per-cause draws.
///
/// Random numbers come from std::mt19937_64 seeded per shard with
/// std::seed_seq{seed_lo32, seed_hi32, shard}; uniforms are
/// (k + 0.5) / 2^53 with k the top 53 bits of a draw, so never 0 or 1.
/// Bit-reproducible for a fixed seed and shard size.
std::vector<LifetimeSample> simulate_cohort(std::span<const CauseSpec> causes, std::size_t n, std::uint64_t seed,
                                            const SimulationOptions& options = {});

struct ProportionEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;  // samples attributed to the cause
  std::size_t total = 0;  // uncensored samples
};

/// Share of uncensored samples killed by `cause`, with binomial standard error.
ProportionEstimate empirical_pi(std::span<const LifetimeSample> samples, std::size_t cause);

std::size_t censored_count(std::span<const LifetimeSample> samples);

struct Histogram {
  std::vector<double> edges;     // size bins + 1
  std::vector<double> density;   // per bin, integrates to 1 over the edges
  std::vector<std::size_t> counts;
  std::size_t used = 0;          // cause samples inside the edges
  std::size_t outside = 0;       // cause samples outside the edges

  double bin_width(std::size_t i) const { return edges[i + 1] - edges[i]; }
};

/// Minimum number of samples of the requested cause.
inline constexpr std::size_t kMinHistogramSamples = 1000;

/// Normalised histogram of the lifetimes killed by `cause` over the given bin
/// edges. Throws SampleSizeError below kMinHistogramSamples.
Histogram empirical_component_distribution(std::span<const LifetimeSample> samples, std::size_t cause,
                                           std::span<const double> edges);
/// Same with Freedman-Diaconis bins from 0 to the largest lifetime.
Histogram empirical_component_distribution(std::span<const LifetimeSample> samples, std::size_t cause);

std::vector<double> freedman_diaconis_edges(std::span<const double> values);

/// sup_x |S_n(x) - S(x)| of the empirical survival of all lifetimes
/// (censored ones counted as surviving past kCensoringAge).
double survival_sup_distance(std::span<const LifetimeSample> samples, const std::function<double(double)>& survival);

/// Dvoretzky-Kiefer-Wolfowitz half-width sqrt(ln(2/alpha) / (2n)).
double dkw_band(std::size_t n, double alpha);

/// CSV dump with header `y,cause,censored`; cause is the cause label (empty when censored).
void write_samples_csv(std::ostream& out, std::span<const LifetimeSample> samples, std::span<const CauseSpec> causes);

}  // namespace mortmix
