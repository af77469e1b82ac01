#include "copulacd/classical_copulas.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "copulacd/error.hpp"

namespace copulacd {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;

constexpr double kPi = std::numbers::pi;
// Above this |theta| the Frank formulas switch to a form that avoids
// cancellation in exp(-theta).
constexpr double kFrankLarge = 30.0;
constexpr double kFrankMaxTheta = 700.0;
constexpr double kQuadTolerance = 1e-12;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

double t_cdf(double x, double nu) { return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x); }

double t_quantile(double p, double nu) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

void check_unit(double u, double v) {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) throw UsageError("copula arguments must lie in [0,1]");
}

void check_open_unit(double u, double v) {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
    throw UsageError("copula density is singular on the boundary; arguments must lie in (0,1)");
  }
}

// Frank CDF for theta > 0.
double frank_cdf_pos(double theta, double u, double v) {
  if (theta <= kFrankLarge) {
    return -std::log1p(std::expm1(-theta * u) * std::expm1(-theta * v) / std::expm1(-theta)) / theta;
  }
  const double m = std::min(u, v);
  const double big = std::max(u, v);
  const double d =
      1.0 + std::exp(-theta * (big - m)) - std::exp(-theta * big) - std::exp(-theta * (1.0 - m));
  return m - (std::log(d) - std::log1p(-std::exp(-theta))) / theta;
}

// Frank density for theta > 0.
double frank_pdf_pos(double theta, double u, double v) {
  if (theta <= kFrankLarge) {
    const double a = -std::expm1(-theta);
    const double au = -std::expm1(-theta * u);
    const double av = -std::expm1(-theta * v);
    const double den = a - au * av;
    return theta * a * std::exp(-theta * (u + v)) / (den * den);
  }
  const double m = std::min(u, v);
  const double big = std::max(u, v);
  const double d =
      1.0 + std::exp(-theta * (big - m)) - std::exp(-theta * big) - std::exp(-theta * (1.0 - m));
  return theta * -std::expm1(-theta) * std::exp(-theta * (big - m)) / (d * d);
}

// Debye function D1(x) = (1/x) int_0^x t / (e^t - 1) dt for x > 0.
double debye1(double x) {
  const auto f = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
  return gauss_kronrod<double, 31>::integrate(f, 0.0, x, 15, kQuadTolerance) / x;
}

double frank_tau(double theta) {
  const double a = std::abs(theta);
  double tau;
  if (a < 1e-4) {
    tau = a / 9.0 - a * a * a / 900.0;
  } else {
    tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
  }
  return theta < 0.0 ? -tau : tau;
}

double gaussian_log_pdf(double rho, double x, double y) {
  const double r2 = 1.0 - rho * rho;
  return -0.5 * std::log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

double t_log_pdf(double rho, double nu, double x, double y) {
  const double r2 = 1.0 - rho * rho;
  const double q = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2);
  return std::lgamma((nu + 2.0) / 2.0) + std::lgamma(nu / 2.0) - 2.0 * std::lgamma((nu + 1.0) / 2.0) -
         0.5 * std::log(r2) - (nu + 2.0) / 2.0 * std::log1p(q) +
         (nu + 1.0) / 2.0 * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

// Counts inversions while merge-sorting `a` in place.
std::uint64_t merge_count(std::vector<double>& a) {
  const std::size_t n = a.size();
  std::vector<double> buf(n);
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (a[j] < a[i]) {
          swaps += mid - i;
          buf[k++] = a[j++];
        } else {
          buf[k++] = a[i++];
        }
      }
      while (i < mid) buf[k++] = a[i++];
      while (j < hi) buf[k++] = a[j++];
    }
    a.swap(buf);
  }
  return swaps;
}

// Sum over runs of equal values of t(t-1)/2, for a sorted sequence.
template <typename Eq>
std::uint64_t tied_pairs(std::size_t n, Eq same_as_previous) {
  std::uint64_t total = 0, run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (same_as_previous(i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

void check_pseudo_observations(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DataError("pseudo-observation lengths differ");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0 && u[i] < 1.0 && v[i] > 0.0 && v[i] < 1.0)) {
      throw DataError("pseudo-observations must lie in (0,1)");
    }
  }
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::student_t: return "student_t";
    case Family::clayton: return "clayton";
    case Family::frank: return "frank";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "student_t") return Family::student_t;
  if (name == "clayton") return Family::clayton;
  if (name == "frank") return Family::frank;
  throw UsageError("unknown copula family '" + name + "'");
}

CopulaFamily CopulaFamily::gaussian(double rho) {
  CopulaFamily f{Family::gaussian, rho, 0.0, 0.0};
  f.validate();
  return f;
}

CopulaFamily CopulaFamily::student_t(double rho, double nu) {
  CopulaFamily f{Family::student_t, rho, nu, 0.0};
  f.validate();
  return f;
}

CopulaFamily CopulaFamily::clayton(double theta) {
  CopulaFamily f{Family::clayton, 0.0, 0.0, theta};
  f.validate();
  return f;
}

CopulaFamily CopulaFamily::frank(double theta) {
  CopulaFamily f{Family::frank, 0.0, 0.0, theta};
  f.validate();
  return f;
}

void CopulaFamily::validate() const {
  switch (family) {
    case Family::gaussian:
      if (!(std::abs(rho) < 1.0)) throw UsageError("gaussian copula requires |rho| < 1");
      return;
    case Family::student_t:
      if (!(std::abs(rho) < 1.0)) throw UsageError("student_t copula requires |rho| < 1");
      if (!(nu > 0.0) || !std::isfinite(nu)) throw UsageError("student_t copula requires nu > 0");
      return;
    case Family::clayton:
      if (!(theta > 0.0) || !std::isfinite(theta)) throw UsageError("clayton copula requires theta > 0");
      return;
    case Family::frank:
      if (theta == 0.0 || !(std::abs(theta) <= kFrankMaxTheta)) {
        throw UsageError("frank copula requires 0 < |theta| <= 700");
      }
      return;
  }
  throw UsageError("unknown copula family");
}

std::string CopulaFamily::describe() const {
  std::ostringstream out;
  out.precision(17);
  out << to_string(family);
  switch (family) {
    case Family::gaussian: out << "(rho=" << rho << ")"; break;
    case Family::student_t: out << "(rho=" << rho << ", nu=" << nu << ")"; break;
    case Family::clayton:
    case Family::frank: out << "(theta=" << theta << ")"; break;
  }
  return out.str();
}

double bivariate_normal_cdf(double h, double k, double r) {
  if (std::isnan(h) || std::isnan(k)) throw UsageError("bivariate normal CDF of NaN");
  if (h == -INFINITY || k == -INFINITY) return 0.0;
  if (h == INFINITY) return norm_cdf(k);
  if (k == INFINITY) return norm_cdf(h);
  if (std::abs(r) < 0.925) {
    // d/dr of the CDF is the bivariate density; integrate it over asin(r).
    const double hs = (h * h + k * k) / 2.0;
    const auto f = [&](double t) {
      const double s = std::sin(t);
      const double c2 = 1.0 - s * s;
      return std::exp((s * h * k - hs) / c2);
    };
    const double area = gauss<double, 20>::integrate(f, 0.0, std::asin(r));
    return std::clamp(norm_cdf(h) * norm_cdf(k) + area / (2.0 * kPi), 0.0, 1.0);
  }
  // Conditional form: int_0^Phi(h) Phi((k - r x(p)) / sqrt(1 - r^2)) dp.
  const double s = std::sqrt((1.0 - r) * (1.0 + r));
  const auto f = [&](double p) { return norm_cdf((k - r * norm_quantile(p)) / s); };
  const double ph = norm_cdf(h);
  if (ph <= 0.0) return 0.0;
  return std::clamp(gauss_kronrod<double, 31>::integrate(f, 0.0, ph, 20, kQuadTolerance), 0.0, 1.0);
}

double bivariate_t_cdf(double h, double k, double r, double nu) {
  if (std::isnan(h) || std::isnan(k)) throw UsageError("bivariate t CDF of NaN");
  if (h == -INFINITY || k == -INFINITY) return 0.0;
  if (h == INFINITY) return t_cdf(k, nu);
  if (k == INFINITY) return t_cdf(h, nu);
  const double r2 = (1.0 - r) * (1.0 + r);
  // The integrand behaves like p^(2/nu) near p = 0, so use tanh-sinh, which
  // tolerates endpoint singularities.
  const auto f = [&](double p) {
    const double x = t_quantile(p, nu);
    if (std::abs(x) <= 1.0) return t_cdf((k - r * x) / std::sqrt(r2 * (nu + x * x) / (nu + 1.0)), nu + 1.0);
    // Divided through by |x| so extreme quantiles do not overflow.
    const double ax = std::abs(x);
    return t_cdf((k / ax - r * std::copysign(1.0, x)) / std::sqrt(r2 * (nu / (ax * ax) + 1.0) / (nu + 1.0)), nu + 1.0);
  };
  const double ph = t_cdf(h, nu);
  if (ph <= 0.0) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  return std::clamp(integrator.integrate(f, 0.0, ph, kQuadTolerance), 0.0, 1.0);
}

double cdf(const CopulaFamily& fam, double u, double v) {
  fam.validate();
  check_unit(u, v);
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  double c = 0.0;
  switch (fam.family) {
    case Family::gaussian: c = bivariate_normal_cdf(norm_quantile(u), norm_quantile(v), fam.rho); break;
    case Family::student_t:
      c = bivariate_t_cdf(t_quantile(u, fam.nu), t_quantile(v, fam.nu), fam.rho, fam.nu);
      break;
    case Family::clayton: {
      const double ut = std::pow(u, fam.theta);
      const double vt = std::pow(v, fam.theta);
      c = u * v * std::pow(ut + vt - ut * vt, -1.0 / fam.theta);
      break;
    }
    case Family::frank:
      c = fam.theta > 0.0 ? frank_cdf_pos(fam.theta, u, v) : u - frank_cdf_pos(-fam.theta, u, 1.0 - v);
      break;
  }
  // Frechet-Hoeffding bounds absorb rounding.
  return std::clamp(c, std::max(u + v - 1.0, 0.0), std::min(u, v));
}

double pdf(const CopulaFamily& fam, double u, double v) {
  fam.validate();
  switch (fam.family) {
    case Family::gaussian:
      check_open_unit(u, v);
      return std::exp(gaussian_log_pdf(fam.rho, norm_quantile(u), norm_quantile(v)));
    case Family::student_t:
      check_open_unit(u, v);
      return std::exp(t_log_pdf(fam.rho, fam.nu, t_quantile(u, fam.nu), t_quantile(v, fam.nu)));
    case Family::clayton: {
      check_open_unit(u, v);
      const double th = fam.theta;
      const double ut = std::pow(u, th);
      const double vt = std::pow(v, th);
      return (1.0 + th) * ut * vt * std::pow(ut + vt - ut * vt, -2.0 - 1.0 / th);
    }
    case Family::frank:
      check_unit(u, v);
      return fam.theta > 0.0 ? frank_pdf_pos(fam.theta, u, v) : frank_pdf_pos(-fam.theta, u, 1.0 - v);
  }
  return 0.0;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n) throw DataError("kendall tau: sample lengths differ");
  if (n < 2) throw DataError("kendall tau needs at least two pairs");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  const std::uint64_t tx = tied_pairs(n, [&](std::size_t i) { return x[idx[i]] == x[idx[i - 1]]; });
  const std::uint64_t txy = tied_pairs(
      n, [&](std::size_t i) { return x[idx[i]] == x[idx[i - 1]] && y[idx[i]] == y[idx[i - 1]]; });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const std::uint64_t swaps = merge_count(ys);
  const std::uint64_t ty = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (tx == n0 || ty == n0) throw DataError("kendall tau undefined for a constant sample");
  const double s = static_cast<double>(n0) - static_cast<double>(tx) - static_cast<double>(ty) +
                   static_cast<double>(txy) - 2.0 * static_cast<double>(swaps);
  return s / std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
}

double kendall_tau(const CopulaFamily& fam) {
  fam.validate();
  switch (fam.family) {
    case Family::gaussian:
    case Family::student_t: return 2.0 / kPi * std::asin(fam.rho);
    case Family::clayton: return fam.theta / (fam.theta + 2.0);
    case Family::frank: return frank_tau(fam.theta);
  }
  return 0.0;
}

CopulaFamily fit(Family family, std::span<const double> u, std::span<const double> v) {
  check_pseudo_observations(u, v);
  const double tau = kendall_tau(u, v);
  switch (family) {
    case Family::gaussian:
    case Family::student_t: {
      if (!(std::abs(tau) < 1.0)) throw DataError("kendall tau of +-1 has no elliptical copula fit");
      const double rho = std::sin(kPi * tau / 2.0);
      if (!(std::abs(rho) < 1.0)) throw DataError("fitted correlation is degenerate");
      if (family == Family::gaussian) return CopulaFamily::gaussian(rho);
      double best_nu = 2.0;
      double best_ll = -std::numeric_limits<double>::infinity();
      for (int nu = 2; nu <= 30; ++nu) {
        double ll = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
          ll += t_log_pdf(rho, nu, t_quantile(u[i], nu), t_quantile(v[i], nu));
        }
        if (ll > best_ll) {
          best_ll = ll;
          best_nu = nu;
        }
      }
      return CopulaFamily::student_t(rho, best_nu);
    }
    case Family::clayton:
      if (!(tau > 0.0 && tau < 1.0)) throw DataError("clayton fit requires 0 < kendall tau < 1");
      return CopulaFamily::clayton(2.0 * tau / (1.0 - tau));
    case Family::frank: {
      if (tau == 0.0 || !(std::abs(tau) < 1.0)) throw DataError("frank fit requires 0 < |kendall tau| < 1");
      const double target = std::abs(tau);
      const auto f = [&](double th) { return frank_tau(th) - target; };
      double lo = 1e-10;
      const double hi = kFrankMaxTheta;
      if (f(hi) < 0.0) throw DataError("kendall tau too close to 1 for a frank fit");
      if (f(lo) > 0.0) lo = 0.0;
      std::uintmax_t iters = 200;
      const auto [a, b] =
          boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
      const double theta = (a + b) / 2.0;
      if (theta == 0.0) throw DataError("frank fit collapsed to independence");
      return CopulaFamily::frank(tau < 0.0 ? -theta : theta);
    }
  }
  throw UsageError("unknown copula family");
}

std::vector<std::array<double, 2>> sample(const CopulaFamily& fam, std::size_t n, std::uint64_t seed) {
  fam.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto open_uniform = [&] {
    double w;
    do w = unif(rng);
    while (w <= 0.0);
    return w;
  };
  std::vector<std::array<double, 2>> out(n);
  switch (fam.family) {
    case Family::gaussian: {
      const double s = std::sqrt((1.0 - fam.rho) * (1.0 + fam.rho));
      for (auto& p : out) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        p = {norm_cdf(z1), norm_cdf(fam.rho * z1 + s * z2)};
      }
      break;
    }
    case Family::student_t: {
      const double s = std::sqrt((1.0 - fam.rho) * (1.0 + fam.rho));
      std::chi_squared_distribution<double> chi2(fam.nu);
      for (auto& p : out) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        const double w = std::sqrt(fam.nu / chi2(rng));
        p = {t_cdf(w * z1, fam.nu), t_cdf(w * (fam.rho * z1 + s * z2), fam.nu)};
      }
      break;
    }
    case Family::clayton: {
      const double th = fam.theta;
      for (auto& p : out) {
        const double u = open_uniform();
        const double w = open_uniform();
        const double v = std::pow(std::pow(u, -th) * (std::pow(w, -th / (1.0 + th)) - 1.0) + 1.0, -1.0 / th);
        p = {u, std::clamp(v, 0.0, 1.0)};
      }
      break;
    }
    case Family::frank: {
      const double th = std::abs(fam.theta);
      for (auto& p : out) {
        const double u = open_uniform();
        const double w = open_uniform();
        double v = u - (std::log1p(w * std::expm1(-th * (1.0 - u))) - std::log1p((1.0 - w) * std::expm1(-th * u))) / th;
        v = std::clamp(v, 0.0, 1.0);
        p = {u, fam.theta < 0.0 ? 1.0 - v : v};
      }
      break;
    }
  }
  return out;
}

}  // namespace copulacd
