#include "mortmix/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mortmix/errors.hpp"

namespace mortmix {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kEulerGamma = 0.57721566490153286061;

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
// Odd indices of kXgk are the Gauss nodes; index 10 is the centre.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208272463298, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double lo;
  double hi;
  double result;
  double error;
};

bool operator<(const Segment& l, const Segment& r) { return l.error < r.error; }

template <class F>
Segment kronrod21(const F& f, double lo, double hi) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double abs_half = std::abs(half);

  std::array<double, 10> fv1{};
  std::array<double, 10> fv2{};
  const double fc = f(centre);
  double res_gauss = 0.0;
  double res_kronrod = kWgk[10] * fc;
  double res_abs = std::abs(res_kronrod);

  for (std::size_t j = 0; j < 5; ++j) {
    const std::size_t jtw = 2 * j + 1;
    const double absc = half * kXgk[jtw];
    const double f1 = f(centre - absc);
    const double f2 = f(centre + absc);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    res_gauss += kWg[j] * (f1 + f2);
    res_kronrod += kWgk[jtw] * (f1 + f2);
    res_abs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (std::size_t j = 0; j < 5; ++j) {
    const std::size_t jtwm1 = 2 * j;
    const double absc = half * kXgk[jtwm1];
    const double f1 = f(centre - absc);
    const double f2 = f(centre + absc);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    res_kronrod += kWgk[jtwm1] * (f1 + f2);
    res_abs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }

  const double mean = 0.5 * res_kronrod;
  double res_asc = kWgk[10] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    res_asc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));
  }

  const double result = res_kronrod * half;
  res_abs *= abs_half;
  res_asc *= abs_half;
  double error = std::abs((res_kronrod - res_gauss) * half);
  if (res_asc != 0.0 && error != 0.0) {
    error = res_asc * std::min(1.0, std::pow(200.0 * error / res_asc, 1.5));
  }
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    error = std::max(50.0 * kEps * res_abs, error);
  }
  return {lo, hi, result, error};
}

template <class F>
double adaptive_kronrod(const F& f, double lo, double hi, const QuadratureConfig& cfg) {
  std::vector<Segment> heap;
  heap.reserve(std::min<std::size_t>(cfg.max_subdivisions, 4096));
  heap.push_back(kronrod21(f, lo, hi));
  double result = heap.front().result;
  double error = heap.front().error;

  while (!(error <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(result)))) {
    if (!std::isfinite(result) || !std::isfinite(error)) {
      throw DomainError("integrate: integrand produced a non-finite value");
    }
    if (heap.size() >= cfg.max_subdivisions) {
      throw ConvergenceError("integrate: subdivision limit of " + std::to_string(cfg.max_subdivisions) +
                                 " reached (estimate " + std::to_string(result) + ", error bound " +
                                 std::to_string(error) + ")",
                             result, error);
    }
    std::pop_heap(heap.begin(), heap.end());
    const Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Segment left = kronrod21(f, worst.lo, mid);
    const Segment right = kronrod21(f, mid, worst.hi);
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());

    result = 0.0;
    error = 0.0;
    for (const auto& s : heap) {
      result += s.result;
      error += s.error;
    }
  }
  return result;
}

// log Gamma(1 + u) for |u| <= 1, accurate in relative terms near u = 0.
double lgamma1p(double u) {
  if (std::abs(u) < 0.01) {
    constexpr std::array<double, 9> zeta = {1.6449340668482264, 1.2020569031595943, 1.0823232337111382,
                                            1.0369277551433699, 1.0173430619844491, 1.0083492773819228,
                                            1.0040773561979443, 1.0020083928260822, 1.0009945751278181};
    double sum = -kEulerGamma * u;
    double power = -u;
    for (std::size_t k = 2; k <= 10; ++k) {
      power *= -u;
      sum += zeta[k - 2] * power / static_cast<double>(k);
    }
    return sum;
  }
  return std::lgamma(1.0 + u);
}

// Gamma(u, x) for u in (-1, 1] and moderate x via
//   Gamma(u, x) = [Gamma(1+u) - x^u] / u - x^u sum_{n>=1} (-x)^n / (n! (u + n)).
// The bracketed term is formed from two expm1 values so it stays accurate as
// u -> 0, where it tends to -gamma_E - ln x.
double incomplete_gamma_small_x(double u, double x) {
  const double log_x = std::log(x);
  double head;
  if (u == 0.0) {
    head = -kEulerGamma - log_x;
  } else {
    head = (std::expm1(lgamma1p(u)) - std::expm1(u * log_x)) / u;
  }
  double term = 1.0;
  double sum = 0.0;
  for (int n = 1; n < 200; ++n) {
    term *= -x / n;
    const double add = term / (u + n);
    sum += add;
    if (std::abs(add) <= kEps * std::abs(sum)) break;
  }
  return head - std::exp(u * log_x) * sum;
}

// Legendre continued fraction (modified Lentz); converges for any real u, x > 0.
double incomplete_gamma_continued_fraction(double u, double x) {
  constexpr double tiny = 1e-300;
  double f = 1.0 - u + x;
  if (f == 0.0) f = tiny;
  double c = f;
  double d = 0.0;
  for (int i = 1; i < 10000; ++i) {
    const double an = i * (u - i);
    const double bn = 2.0 * i + 1.0 - u + x;
    d = bn + an * d;
    if (d == 0.0) d = tiny;
    c = bn + an / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(u * std::log(x) - x) / f;
}

// Gamma(u) - gamma(u, x) with the lower function from its power series; u > 1, x < u + 1.
double incomplete_gamma_lower_series(double u, double x) {
  double term = 1.0 / u;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (u + n);
    sum += term;
    if (term < sum * kEps) break;
  }
  const double lower = std::exp(u * std::log(x) - x) * sum;
  return std::tgamma(u) - lower;
}

}  // namespace

void validate(const QuadratureConfig& cfg) {
  if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0)) {
    throw std::invalid_argument("QuadratureConfig: tolerances must be > 0");
  }
  if (cfg.max_subdivisions < 1) {
    throw std::invalid_argument("QuadratureConfig: max_subdivisions must be >= 1");
  }
}

double integrate(const std::function<double(double)>& f, double lower, double upper,
                 const QuadratureConfig& cfg) {
  validate(cfg);
  if (std::isnan(lower) || std::isnan(upper) || std::isinf(lower)) {
    throw DomainError("integrate: lower limit must be finite and upper must not be NaN");
  }
  if (upper == lower) return 0.0;
  if (upper < lower) return -integrate(f, upper, lower, cfg);

  if (std::isinf(upper)) {
    auto mapped = [&f, lower](double s) {
      const double one_minus = 1.0 - s;
      return f(lower + s / one_minus) / (one_minus * one_minus);
    };
    return adaptive_kronrod(mapped, 0.0, 1.0, cfg);
  }
  return adaptive_kronrod(f, lower, upper, cfg);
}

double find_root(const std::function<double(double)>& f, double lo, double hi, const RootOptions& options) {
  double a = lo;
  double b = hi;
  double fa = f(a);
  double fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) {
    throw BracketError("find_root: function is NaN at a bracket endpoint");
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::signbit(fa) == std::signbit(fb)) {
    throw BracketError("find_root: no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "]");
  }

  // Brent (1973) zeroin. b is the best iterate, [b, c] always brackets the root.
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    if (std::signbit(fb) == std::signbit(fc)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    if (options.observer) options.observer(std::min(b, c), std::max(b, c));

    const double tol1 = 2.0 * kEps * std::abs(b) + 0.25 * options.tol;
    const double half = 0.5 * (c - b);
    if (std::abs(half) <= tol1 || fb == 0.0) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * half * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * half * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = half;
        e = d;
      }
    } else {
      d = half;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, half);
    fb = f(b);
    if (std::isnan(fb)) {
      throw DomainError("find_root: function returned NaN at " + std::to_string(b));
    }
  }
  throw ConvergenceError("find_root: iteration limit reached", b, std::abs(c - b));
}

double upper_incomplete_gamma(double u, double x) {
  if (!std::isfinite(u) || std::isnan(x)) {
    throw DomainError("upper_incomplete_gamma: shape must be finite");
  }
  if (!(x > 0.0)) {
    throw DomainError("upper_incomplete_gamma: x must be > 0, got " + std::to_string(x));
  }
  if (std::isinf(x)) return 0.0;

  constexpr double kSeriesLimit = 1.5;
  if (u > 1.0) {
    return x < u + 1.0 ? incomplete_gamma_lower_series(u, x) : incomplete_gamma_continued_fraction(u, x);
  }
  if (x > kSeriesLimit) return incomplete_gamma_continued_fraction(u, x);
  if (u > -1.0) return incomplete_gamma_small_x(u, x);

  // u <= -1: evaluate at u + n in (-1, 0] and recur downwards,
  // Gamma(v - 1, x) = (Gamma(v, x) - x^{v-1} e^{-x}) / (v - 1).
  const double n = std::floor(-u);
  double v = u + n;
  double value = incomplete_gamma_small_x(v, x);
  const double log_x = std::log(x);
  for (int i = 0; i < static_cast<int>(n); ++i) {
    v -= 1.0;
    value = (value - std::exp(v * log_x - x)) / v;
  }
  return value;
}

double gauss_2f1(double m, double p, double q, double z) {
  if (!std::isfinite(m) || !std::isfinite(p) || !std::isfinite(q) || !std::isfinite(z)) {
    throw DomainError("gauss_2f1: arguments must be finite");
  }
  if (!(p > 0.0) || !(q > p)) {
    throw DomainError("gauss_2f1: Euler integral requires q > p > 0");
  }
  if (!(z < 1.0)) {
    throw DomainError("gauss_2f1: Euler integral requires z < 1, got " + std::to_string(z));
  }
  if (z == 0.0) return 1.0;

  const double r = q - p;
  const double one_minus_z = 1.0 - z;
  const QuadratureConfig cfg{1e-300, 1e-13, 5000};

  // [0, 1/2]: u^{p-1} is removed by u = v^{1/p} when p < 1.
  double left;
  if (p < 1.0) {
    auto g = [&](double v) {
      const double u = std::pow(v, 1.0 / p);
      return std::exp((r - 1.0) * std::log1p(-u) - m * std::log1p(-z * u)) / p;
    };
    left = integrate(g, 0.0, std::pow(0.5, p), cfg);
  } else {
    auto g = [&](double u) {
      return std::exp((p - 1.0) * std::log(u) + (r - 1.0) * std::log1p(-u) - m * std::log1p(-z * u));
    };
    left = integrate(g, 0.0, 0.5, cfg);
  }

  // [1/2, 1] in eps = 1 - u, so 1 - z u = (1 - z) + z eps keeps full precision;
  // eps^{r-1} is removed by eps = t^{1/r} when r < 1.
  double right;
  if (r < 1.0) {
    auto g = [&](double t) {
      const double eps = std::pow(t, 1.0 / r);
      return std::exp((p - 1.0) * std::log1p(-eps) - m * std::log(one_minus_z + z * eps)) / r;
    };
    right = integrate(g, 0.0, std::pow(0.5, r), cfg);
  } else {
    auto g = [&](double eps) {
      return std::exp((r - 1.0) * std::log(eps) + (p - 1.0) * std::log1p(-eps) -
                      m * std::log(one_minus_z + z * eps));
    };
    right = integrate(g, 0.0, 0.5, cfg);
  }

  const double log_prefactor = std::lgamma(q) - std::lgamma(p) - std::lgamma(r);
  return std::exp(log_prefactor) * (left + right);
}

}  // namespace mortmix
