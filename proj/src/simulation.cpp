#include "mortmix/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "mortmix/csv.hpp"
#include "mortmix/errors.hpp"
#include "mortmix/special_functions.hpp"

namespace mortmix {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double uniform_open(std::mt19937_64& engine) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(engine() >> 11) + 0.5) * scale;
}

std::function<double(double)> beard_inverse(double a, double b, double k) {
  return [a, b, k](double target) {
    const double ka = k * a;
    return std::log1p((1.0 + ka) * std::expm1(b * k * target) / ka) / b;
  };
}

void simulate_shard(std::span<const CauseSpec> causes, std::uint64_t seed, std::size_t shard,
                    std::span<LifetimeSample> out) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(shard)};
  std::mt19937_64 engine(seq);
  for (auto& sample : out) {
    sample = LifetimeSample{kCensoringAge, std::nullopt};
    for (std::size_t j = 0; j < causes.size(); ++j) {
      const FailureDraw draw = sample_failure_time(causes[j], uniform_open(engine));
      if (!draw.censored && draw.age < sample.y) {
        sample.y = draw.age;
        sample.cause = j;
      }
    }
  }
}

}  // namespace

CauseSpec exponential_cause(std::string label, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("exponential_cause: rate must be > 0");
  }
  return {std::move(label), [rate](double x) { return rate * x; }, [rate](double y) { return y / rate; }};
}

CauseSpec gompertz_cause(std::string label, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("gompertz_cause: a and b must be > 0");
  return {std::move(label), [a, b](double x) { return a / b * std::expm1(b * x); },
          [a, b](double y) { return std::log1p(b * y / a) / b; }};
}

CauseSpec baseline_cause(std::string label, const HazardModel& model) {
  require_valid(model);
  CauseSpec cause{std::move(label), [model](double x) { return baseline_cumulative_hazard(model, x); }, {}};
  cause.inverse_cumulative_hazard = std::visit(
      Overloaded{
          [](const GompertzMakeham& m) -> std::function<double(double)> {
            return [a = m.a, b = m.b](double y) { return std::log1p(b * y / a) / b; };
          },
          [](const GammaGompertzMakeham& m) -> std::function<double(double)> {
            const double s = m.a * m.gamma / m.b;
            return [s, b = m.b, g = m.gamma](double y) { return std::log1p(std::expm1(g * y) / s) / b; };
          },
          [](const BeardMakeham& m) { return beard_inverse(m.a, m.b, m.k); },
          [](const KannistoMakeham& m) { return beard_inverse(m.a, m.b, 1.0); },
          [](const SilerMakeham&) -> std::function<double(double)> { return {}; },
      },
      model);
  return cause;
}

std::vector<CauseSpec> makeham_causes(const HazardModel& model) {
  require_valid(model);
  const double c = makeham_term(model);
  if (c == 0.0) throw DegenerateComponentError("makeham_causes: c = 0 leaves no premature cause");
  std::vector<CauseSpec> causes;
  causes.push_back(exponential_cause("premature", c));
  causes.push_back(baseline_cause("senescent", model));
  return causes;
}

FailureDraw sample_failure_time(const CauseSpec& cause, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("sample_failure_time: u must lie in (0, 1)");
  }
  const double target = -std::log(u);
  if (cause.inverse_cumulative_hazard) {
    const double age = cause.inverse_cumulative_hazard(target);
    if (!(age <= kCensoringAge)) return {kCensoringAge, true};
    return {std::max(age, 0.0), false};
  }

  auto gap = [&](double x) { return cause.cumulative_hazard(x) - target; };
  double hi = 150.0;
  while (gap(hi) < 0.0) {
    if (hi >= kCensoringAge) return {kCensoringAge, true};
    hi = std::min(2.0 * hi, kCensoringAge);
  }
  return {find_root(gap, 0.0, hi), false};
}

std::vector<LifetimeSample> simulate_cohort(std::span<const CauseSpec> causes, std::size_t n, std::uint64_t seed,
                                            const SimulationOptions& options) {
  if (n < 1) throw std::invalid_argument("simulate_cohort: n must be >= 1");
  if (causes.empty()) throw std::invalid_argument("simulate_cohort: at least one cause is required");
  if (options.shard_size < 1) throw std::invalid_argument("simulate_cohort: shard_size must be >= 1");

  std::vector<LifetimeSample> samples(n);
  const std::size_t shards = (n + options.shard_size - 1) / options.shard_size;
  auto run = [&](std::size_t shard) {
    const std::size_t begin = shard * options.shard_size;
    const std::size_t count = std::min(options.shard_size, n - begin);
    simulate_shard(causes, seed, shard, std::span(samples).subspan(begin, count));
  };

  const std::size_t workers = std::min(std::max<std::size_t>(options.threads, 1), shards);
  if (workers == 1) {
    for (std::size_t s = 0; s < shards; ++s) run(s);
    return samples;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t s = next++; s < shards; s = next++) run(s);
    });
  }
  pool.clear();
  return samples;
}

ProportionEstimate empirical_pi(std::span<const LifetimeSample> samples, std::size_t cause) {
  ProportionEstimate est;
  for (const auto& s : samples) {
    if (!s.cause) continue;
    ++est.total;
    if (*s.cause == cause) ++est.count;
  }
  if (est.total == 0) throw std::invalid_argument("empirical_pi: no uncensored samples");
  const auto n = static_cast<double>(est.total);
  est.value = static_cast<double>(est.count) / n;
  est.standard_error = std::sqrt(est.value * (1.0 - est.value) / n);
  return est;
}

std::size_t censored_count(std::span<const LifetimeSample> samples) {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const LifetimeSample& s) { return s.censored(); }));
}

Histogram empirical_component_distribution(std::span<const LifetimeSample> samples, std::size_t cause,
                                           std::span<const double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("histogram: need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("histogram: edges must be strictly increasing");
  }

  Histogram hist;
  hist.edges.assign(edges.begin(), edges.end());
  hist.counts.assign(edges.size() - 1, 0);
  std::size_t of_cause = 0;
  for (const auto& s : samples) {
    if (s.cause != cause) continue;
    ++of_cause;
    if (s.y < edges.front() || s.y > edges.back()) {
      ++hist.outside;
      continue;
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), s.y);
    auto bin = static_cast<std::size_t>(std::distance(edges.begin(), it)) - 1;
    bin = std::min(bin, hist.counts.size() - 1);
    ++hist.counts[bin];
    ++hist.used;
  }
  if (of_cause < kMinHistogramSamples) {
    throw SampleSizeError("histogram: " + std::to_string(of_cause) + " samples of cause " + std::to_string(cause) +
                          ", need at least " + std::to_string(kMinHistogramSamples));
  }
  hist.density.resize(hist.counts.size());
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    hist.density[i] = hist.used == 0 ? 0.0
                                     : static_cast<double>(hist.counts[i]) /
                                           (static_cast<double>(hist.used) * hist.bin_width(i));
  }
  return hist;
}

std::vector<double> freedman_diaconis_edges(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("freedman_diaconis_edges: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double top = sorted.back();
  const double iqr = quantile(0.75) - quantile(0.25);
  double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
  if (!(width > 0.0)) width = top > 0.0 ? top : 1.0;
  const auto bins = static_cast<std::size_t>(std::clamp(std::ceil(top / width), 1.0, 10000.0));
  width = top > 0.0 ? top / static_cast<double>(bins) : 1.0;
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = static_cast<double>(i) * width;
  return edges;
}

Histogram empirical_component_distribution(std::span<const LifetimeSample> samples, std::size_t cause) {
  std::vector<double> values;
  for (const auto& s : samples) {
    if (s.cause == cause) values.push_back(s.y);
  }
  if (values.size() < kMinHistogramSamples) {
    throw SampleSizeError("histogram: " + std::to_string(values.size()) + " samples of cause " +
                          std::to_string(cause) + ", need at least " + std::to_string(kMinHistogramSamples));
  }
  const auto edges = freedman_diaconis_edges(values);
  return empirical_component_distribution(samples, cause, edges);
}

double survival_sup_distance(std::span<const LifetimeSample> samples, const std::function<double(double)>& survival) {
  if (samples.empty()) throw std::invalid_argument("survival_sup_distance: no samples");
  std::vector<double> ys;
  ys.reserve(samples.size());
  for (const auto& s : samples) ys.push_back(s.y);
  std::sort(ys.begin(), ys.end());
  const auto n = static_cast<double>(ys.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double s = survival(ys[i]);
    const double before = 1.0 - static_cast<double>(i) / n;
    const double after = 1.0 - static_cast<double>(i + 1) / n;
    sup = std::max({sup, std::abs(s - before), std::abs(s - after)});
  }
  return sup;
}

double dkw_band(std::size_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("dkw_band: need n >= 1, alpha in (0,1)");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

void write_samples_csv(std::ostream& out, std::span<const LifetimeSample> samples, std::span<const CauseSpec> causes) {
  out << "y,cause,censored\n";
  for (const auto& s : samples) {
    out << csv::format_number(s.y) << ',';
    if (s.cause) out << csv::escape(causes[*s.cause].label);
    out << ',' << (s.censored() ? "true" : "false") << '\n';
  }
}

}  // namespace mortmix
