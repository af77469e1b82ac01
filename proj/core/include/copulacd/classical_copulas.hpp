#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace copulacd {

enum class Family { gaussian, student_t, clayton, frank };

std::string to_string(Family f);
/// Accepts "gaussian", "student_t", "clayton", "frank". Throws UsageError.
Family parse_family(const std::string& name);

/// A parameterized bivariate copula. Only the fields of the active family
/// are meaningful: rho (gaussian, student_t), nu (student_t), theta
/// (clayton, frank).
struct CopulaFamily {
  Family family = Family::gaussian;
  double rho = 0.0;
  double nu = 0.0;
  double theta = 0.0;

  static CopulaFamily gaussian(double rho);
  static CopulaFamily student_t(double rho, double nu);
  static CopulaFamily clayton(double theta);
  static CopulaFamily frank(double theta);

  /// Throws UsageError when a parameter is outside the admissible range.
  void validate() const;
  std::string describe() const;

  friend bool operator==(const CopulaFamily&, const CopulaFamily&) = default;
};

/// Copula CDF. Boundary values C(u,0) = C(0,v) = 0, C(u,1) = u and
/// C(1,v) = v are returned exactly. Throws UsageError for u, v outside [0,1].
double cdf(const CopulaFamily& fam, double u, double v);

/// Copula density. Gaussian, Student-t and Clayton are singular on the
/// boundary and throw UsageError unless u, v lie in (0,1); Frank accepts [0,1].
double pdf(const CopulaFamily& fam, double u, double v);

/// Bivariate standard normal CDF P(X <= h, Y <= k) with correlation r.
double bivariate_normal_cdf(double h, double k, double r);

/// Bivariate Student-t CDF with correlation r and nu degrees of freedom.
double bivariate_t_cdf(double h, double k, double r, double nu);

/// Kendall's tau-b, O(n log n). Throws DataError on size mismatch, fewer
/// than two pairs, or a constant sample.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Population Kendall tau implied by the copula.
double kendall_tau(const CopulaFamily& fam);

/// Kendall-tau inversion fit on pseudo-observations in (0,1). Student-t
/// additionally picks nu in {2..30} by maximum likelihood.
/// Throws DataError when tau lies outside the family's support.
CopulaFamily fit(Family family, std::span<const double> u, std::span<const double> v);

/// n draws (u, v) from the copula, deterministic per seed.
std::vector<std::array<double, 2>> sample(const CopulaFamily& fam, std::size_t n, std::uint64_t seed);

}  // namespace copulacd
