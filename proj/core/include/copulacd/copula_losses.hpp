#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "copulacd/marginals.hpp"
#include "copulacd/neural_copula.hpp"

namespace copulacd {

/// Weights of the boundary, integration, non-negativity, likelihood and
/// observation terms of the total loss.
struct LossWeights {
  double boundary = 2.0;
  double integration = 0.3;
  double nonneg = 1.0;
  double ml = 0.1;
  double observation = 5.0;

  void validate() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Sampling densities and constants of the copula losses.
struct LossSettings {
  int n3 = 400;  ///< points per boundary edge
  int n4 = 256;  ///< integration grid side
  int n5 = 256;  ///< non-negativity grid side
  int n6 = 100;  ///< observation grid side
  double eta = 10.0;
  double rho = kDefaultRho;
  LossWeights weights;

  void validate() const;
  friend bool operator==(const LossSettings&, const LossSettings&) = default;
};

struct LossBreakdown {
  double boundary = 0.0;
  double integration = 0.0;
  double nonneg = 0.0;
  double ml = 0.0;
  double observation = 0.0;
  double total = 0.0;
};

/// Weighted sum of the five components.
double combine(const LossBreakdown& parts, const LossWeights& w);

/// Paired training features with their marginal tables and the
/// pseudo-observations u = table1[g1], v = table2[g2].
struct TrainingSet {
  std::vector<std::uint8_t> g1;
  std::vector<std::uint8_t> g2;
  CdfTable table1;
  CdfTable table2;
  std::vector<double> u;
  std::vector<double> v;

  std::size_t size() const { return g1.size(); }
};

/// Fits both KDE tables on the features themselves.
TrainingSet make_training_set(std::vector<std::uint8_t> g1, std::vector<std::uint8_t> g2, const KdeOptions& kde = {});
TrainingSet make_training_set(std::vector<std::uint8_t> g1, std::vector<std::uint8_t> g2, CdfTable table1,
                              CdfTable table2);

/// Anything that can report CopulaEval at a point: a network, an analytic
/// copula, or a test stub.
using CopulaSurface = std::function<CopulaEval(double u, double v)>;

CopulaSurface net_surface(const CopulaNet& net, double rho = kDefaultRho);

/// n points evenly spaced on [0, 1], endpoints included.
std::vector<double> linspace01(int n);

/// Intensity levels of the observation grid: round(i * 255 / (n6 - 1)).
std::vector<int> observation_levels(int n6);

/// sum |C(u,0)| + |C(0,v)| + |C(u,1) - u| + |C(1,v) - v| over n3 points per edge.
double loss_boundary(const CopulaSurface& c, int n3);
/// |1 - sum pdf * delta^2| over an n4 x n4 grid, delta = 1 / (n4 - 1).
double loss_integration(const CopulaSurface& c, int n4);
/// Mean of max(-duv, 0) over an n5 x n5 grid.
double loss_nonneg(const CopulaSurface& c, int n5);
/// max(eta - sum log pdf(u_i, v_i), 0) / N. One-sided, so a likelihood
/// above eta is never pushed back down.
double loss_ml(const CopulaSurface& c, std::span<const double> u, std::span<const double> v, double eta);
/// sum over the n6 x n6 observation grid of |C(t1[x_i], t2[y_j]) - F_emp(x_i, y_j)|.
double loss_observation(const CopulaSurface& c, std::span<const std::uint8_t> g1, std::span<const std::uint8_t> g2,
                        const CdfTable& t1, const CdfTable& t2, int n6);

/// All five terms evaluated on an arbitrary surface.
LossBreakdown total_loss(const CopulaSurface& c, const TrainingSet& data, const LossSettings& settings);

/// Batched loss evaluation for a network, with exact parameter gradients.
/// Grid points are fixed at construction.
class LossEngine {
 public:
  LossEngine(const LossSettings& settings, const TrainingSet& data, std::size_t chunk_size = 512);
  ~LossEngine();
  LossEngine(LossEngine&&) noexcept;
  LossEngine& operator=(LossEngine&&) noexcept;

  LossBreakdown evaluate(const CopulaNet& net) const;
  /// Also writes d(total)/d(params) into grad (resized to params.size()).
  LossBreakdown evaluate(const CopulaNet& net, std::vector<double>& grad) const;

  const LossSettings& settings() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper around LossEngine.
LossBreakdown total_loss(const CopulaNet& net, const TrainingSet& data, const LossSettings& settings);

}  // namespace copulacd
