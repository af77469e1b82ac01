#include "copulacd/copula_losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "copulacd/error.hpp"
#include "copulacd/parallel.hpp"
#include "net_kernel.hpp"

namespace copulacd {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

void require_count(int n, const char* name) {
  if (n < 2) throw UsageError(std::string(name) + " must be at least 2");
}

}  // namespace

void LossWeights::validate() const {
  for (const double w : {boundary, integration, nonneg, ml, observation}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw UsageError("loss weights must be finite and non-negative");
  }
}

void LossSettings::validate() const {
  require_count(n3, "n3");
  require_count(n4, "n4");
  require_count(n5, "n5");
  require_count(n6, "n6");
  if (!(rho > 0.0)) throw UsageError("rho must be positive");
  if (!std::isfinite(eta)) throw UsageError("eta must be finite");
  weights.validate();
}

double combine(const LossBreakdown& p, const LossWeights& w) {
  return w.boundary * p.boundary + w.integration * p.integration + w.nonneg * p.nonneg + w.ml * p.ml +
         w.observation * p.observation;
}

TrainingSet make_training_set(std::vector<std::uint8_t> g1, std::vector<std::uint8_t> g2, const KdeOptions& kde) {
  CdfTable t1 = fit_kde_cdf(g1, kde);
  CdfTable t2 = fit_kde_cdf(g2, kde);
  return make_training_set(std::move(g1), std::move(g2), t1, t2);
}

TrainingSet make_training_set(std::vector<std::uint8_t> g1, std::vector<std::uint8_t> g2, CdfTable table1,
                              CdfTable table2) {
  if (g1.empty() || g1.size() != g2.size()) throw DataError("training features must be non-empty and paired");
  TrainingSet set;
  set.u = pit(g1, table1);
  set.v = pit(g2, table2);
  set.g1 = std::move(g1);
  set.g2 = std::move(g2);
  set.table1 = table1;
  set.table2 = table2;
  return set;
}

CopulaSurface net_surface(const CopulaNet& net, double rho) {
  return [&net, rho](double u, double v) { return forward_with_derivs(net, u, v, rho); };
}

std::vector<double> linspace01(int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
  return out;
}

std::vector<int> observation_levels(int n6) {
  require_count(n6, "n6");
  std::vector<int> out(static_cast<std::size_t>(n6));
  for (int i = 0; i < n6; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(255.0 * i / (n6 - 1)));
  }
  return out;
}

double loss_boundary(const CopulaSurface& c, int n3) {
  require_count(n3, "n3");
  double acc = 0.0;
  for (const double t : linspace01(n3)) {
    acc += std::abs(c(t, 0.0).c);
    acc += std::abs(c(0.0, t).c);
    acc += std::abs(c(t, 1.0).c - t);
    acc += std::abs(c(1.0, t).c - t);
  }
  return acc;
}

double loss_integration(const CopulaSurface& c, int n4) {
  require_count(n4, "n4");
  const auto grid = linspace01(n4);
  const double delta = 1.0 / (n4 - 1);
  double acc = 0.0;
  for (const double u : grid)
    for (const double v : grid) acc += c(u, v).pdf;
  return std::abs(1.0 - acc * delta * delta);
}

double loss_nonneg(const CopulaSurface& c, int n5) {
  require_count(n5, "n5");
  const auto grid = linspace01(n5);
  double acc = 0.0;
  for (const double u : grid)
    for (const double v : grid) acc += std::max(-c(u, v).duv, 0.0);
  return acc / (static_cast<double>(n5) * n5);
}

double loss_ml(const CopulaSurface& c, std::span<const double> u, std::span<const double> v, double eta) {
  if (u.empty() || u.size() != v.size()) throw DataError("likelihood loss needs paired, non-empty data");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += std::log(c(u[i], v[i]).pdf);
  return std::max(eta - acc, 0.0) / static_cast<double>(u.size());
}

double loss_observation(const CopulaSurface& c, std::span<const std::uint8_t> g1, std::span<const std::uint8_t> g2,
                        const CdfTable& t1, const CdfTable& t2, int n6) {
  const auto levels = observation_levels(n6);
  double acc = 0.0;
  for (const int x : levels) {
    for (const int y : levels) {
      const double model = c(t1.entries[static_cast<std::size_t>(x)], t2.entries[static_cast<std::size_t>(y)]).c;
      acc += std::abs(model - empirical_joint_cdf(g1, g2, x, y));
    }
  }
  return acc;
}

LossBreakdown total_loss(const CopulaSurface& c, const TrainingSet& data, const LossSettings& s) {
  s.validate();
  LossBreakdown out;
  out.boundary = loss_boundary(c, s.n3);
  out.integration = loss_integration(c, s.n4);
  out.nonneg = loss_nonneg(c, s.n5);
  out.ml = loss_ml(c, data.u, data.v, s.eta);
  out.observation = loss_observation(c, data.g1, data.g2, data.table1, data.table2, s.n6);
  out.total = combine(out, s.weights);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct PointSet {
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> target;  // only for boundary / observation sets

  std::size_t size() const { return u.size(); }
};

PointSet grid_points(int n) {
  PointSet p;
  const auto g = linspace01(n);
  for (const double u : g) {
    for (const double v : g) {
      p.u.push_back(u);
      p.v.push_back(v);
    }
  }
  return p;
}

struct ChunkResult {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> grad;
  std::vector<double> grad_fixed;
};

// Upstream seeds for one chunk. `c` and `duv` feed the primary gradient;
// `duv_fixed` feeds a second gradient that is not rescaled after the sweep.
struct Seeds {
  std::vector<double> c;
  std::vector<double> duv;
  std::vector<double> duv_fixed;
  bool any_fixed = false;
};

// Per-chunk callback: given the tape for points [begin, begin + n), add
// scalar partials to (a, b) and, when `seeds` is non-null, fill them.
using ChunkFn = std::function<void(const detail::Tape&, std::size_t begin, std::size_t n, ChunkResult&, Seeds*)>;

struct SweepGrad {
  std::vector<double> primary;
  std::vector<double> fixed;
};

}  // namespace

struct LossEngine::Impl {
  LossSettings settings;
  std::size_t chunk;
  PointSet boundary;
  PointSet observation;
  PointSet integration_grid;
  PointSet nonneg_grid;  // empty when shared with the integration grid
  PointSet data;

  // Sweeps all points of `pts`, returning summed partials (in chunk order)
  // and the summed parameter gradients when `grad` is non-null.
  std::pair<double, double> sweep(const CopulaNet& net, const PointSet& pts, bool derivs, const ChunkFn& fn,
                                  SweepGrad* grad) const {
    const std::size_t n = pts.size();
    const std::size_t chunks = (n + chunk - 1) / chunk;
    const std::size_t np = net.params.size();
    std::vector<ChunkResult> results(chunks);
    parallel_for(chunks, [&](std::size_t k) {
      const std::size_t begin = k * chunk;
      const std::size_t count = std::min(chunk, n - begin);
      thread_local detail::Tape tape;
      detail::forward(net, std::span(pts.u).subspan(begin, count), std::span(pts.v).subspan(begin, count), derivs,
                      tape);
      ChunkResult& r = results[k];
      if (grad) {
        Seeds s;
        s.c.assign(count, 0.0);
        s.duv.assign(derivs ? count : 0, 0.0);
        s.duv_fixed.assign(derivs ? count : 0, 0.0);
        fn(tape, begin, count, r, &s);
        r.grad.assign(np, 0.0);
        detail::backward(net, tape, s.c, s.duv, r.grad);
        if (s.any_fixed) {
          r.grad_fixed.assign(np, 0.0);
          std::fill(s.c.begin(), s.c.end(), 0.0);
          detail::backward(net, tape, s.c, s.duv_fixed, r.grad_fixed);
        }
      } else {
        fn(tape, begin, count, r, nullptr);
      }
    });
    double a = 0.0, b = 0.0;
    if (grad) {
      grad->primary.assign(np, 0.0);
      grad->fixed.assign(np, 0.0);
    }
    for (const auto& r : results) {
      a += r.a;
      b += r.b;
      if (grad) {
        for (std::size_t i = 0; i < np; ++i) grad->primary[i] += r.grad[i];
        if (!r.grad_fixed.empty()) {
          for (std::size_t i = 0; i < np; ++i) grad->fixed[i] += r.grad_fixed[i];
        }
      }
    }
    if (!std::isfinite(a) || !std::isfinite(b)) throw NumericalError("non-finite loss term; weights have diverged");
    return {a, b};
  }

  static void accumulate(std::vector<double>& grad, const SweepGrad& g, double scale) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += scale * g.primary[i] + g.fixed[i];
  }

  // sum |C - target| with upstream weight * sign(C - target).
  double absolute_residual(const CopulaNet& net, const PointSet& pts, double weight, std::vector<double>* grad) const {
    SweepGrad g;
    const double total = sweep(net, pts, false,
                               [&](const detail::Tape& t, std::size_t begin, std::size_t n, ChunkResult& r, Seeds* s) {
                                 for (std::size_t i = 0; i < n; ++i) {
                                   const double res = t.c(static_cast<Eigen::Index>(i)) - pts.target[begin + i];
                                   r.a += std::abs(res);
                                   if (s) s->c[i] = sign(res);
                                 }
                               },
                               grad ? &g : nullptr)
                             .first;
    if (grad) accumulate(*grad, g, weight);
    return total;
  }

  LossBreakdown run(const CopulaNet& net, std::vector<double>* grad) const {
    net.validate();
    const LossWeights& w = settings.weights;
    const double rho = settings.rho;
    LossBreakdown out;
    if (grad) grad->assign(net.params.size(), 0.0);

    out.boundary = absolute_residual(net, boundary, w.boundary, grad);
    out.observation = absolute_residual(net, observation, w.observation, grad);

    // The gradient of the summed pdf does not depend on the sign of the outer
    // |1 - S|, so one sweep collects it and the sign is applied afterwards.
    // Non-negativity shares the sweep when both grids coincide.
    const double delta = 1.0 / (settings.n4 - 1);
    const bool shared = nonneg_grid.size() == 0;
    const double nonneg_norm = 1.0 / (static_cast<double>(settings.n5) * settings.n5);
    const double g_neg = -w.nonneg * nonneg_norm;
    SweepGrad gi;
    const auto [pdf_sum, neg_sum] = sweep(
        net, integration_grid, true,
        [&](const detail::Tape& t, std::size_t, std::size_t n, ChunkResult& r, Seeds* s) {
          for (std::size_t i = 0; i < n; ++i) {
            const double duv = t.duv(static_cast<Eigen::Index>(i));
            r.a += std::max(duv, 0.0) + rho;
            r.b += std::max(-duv, 0.0);
            if (s) {
              if (duv > 0.0) s->duv[i] = 1.0;
              if (shared && duv < 0.0) {
                s->duv_fixed[i] = g_neg;
                s->any_fixed = true;
              }
            }
          }
        },
        grad ? &gi : nullptr);
    const double s = pdf_sum * delta * delta;
    out.integration = std::abs(1.0 - s);
    if (shared) out.nonneg = neg_sum * nonneg_norm;
    if (grad) accumulate(*grad, gi, -w.integration * sign(1.0 - s) * delta * delta);

    if (!shared) {
      SweepGrad gn;
      out.nonneg = nonneg_norm * sweep(net, nonneg_grid, true,
                                       [&](const detail::Tape& t, std::size_t, std::size_t n, ChunkResult& r, Seeds* sd) {
                                         for (std::size_t i = 0; i < n; ++i) {
                                           const double duv = t.duv(static_cast<Eigen::Index>(i));
                                           r.a += std::max(-duv, 0.0);
                                           if (sd && duv < 0.0) sd->duv[i] = 1.0;
                                         }
                                       },
                                       grad ? &gn : nullptr)
                                     .first;
      if (grad) accumulate(*grad, gn, g_neg);
    }

    // Likelihood term: same single-sweep structure as the integration term.
    const double n2 = static_cast<double>(data.size());
    SweepGrad gm;
    const double log_sum = sweep(net, data, true,
                                 [&](const detail::Tape& t, std::size_t, std::size_t n, ChunkResult& r, Seeds* sd) {
                                   for (std::size_t i = 0; i < n; ++i) {
                                     const double duv = t.duv(static_cast<Eigen::Index>(i));
                                     r.a += std::log(std::max(duv, 0.0) + rho);
                                     if (sd && duv > 0.0) sd->duv[i] = 1.0 / (duv + rho);
                                   }
                                 },
                                 grad ? &gm : nullptr)
                               .first;
    out.ml = std::max(settings.eta - log_sum, 0.0) / n2;
    if (grad && log_sum < settings.eta) accumulate(*grad, gm, -w.ml / n2);

    out.total = combine(out, w);
    return out;
  }
};

LossEngine::LossEngine(const LossSettings& settings, const TrainingSet& data, std::size_t chunk_size)
    : impl_(std::make_unique<Impl>()) {
  settings.validate();
  if (data.size() == 0 || data.u.size() != data.size() || data.v.size() != data.size()) {
    throw DataError("training set is empty or inconsistent");
  }
  Impl& m = *impl_;
  m.settings = settings;
  m.chunk = std::max<std::size_t>(1, chunk_size);

  for (const double t : linspace01(settings.n3)) {
    for (const auto& [u, v, target] : {std::array{t, 0.0, 0.0}, std::array{0.0, t, 0.0}, std::array{t, 1.0, t},
                                       std::array{1.0, t, t}}) {
      m.boundary.u.push_back(u);
      m.boundary.v.push_back(v);
      m.boundary.target.push_back(target);
    }
  }
  for (const int x : observation_levels(settings.n6)) {
    for (const int y : observation_levels(settings.n6)) {
      m.observation.u.push_back(data.table1.entries[static_cast<std::size_t>(x)]);
      m.observation.v.push_back(data.table2.entries[static_cast<std::size_t>(y)]);
      m.observation.target.push_back(empirical_joint_cdf(data.g1, data.g2, x, y));
    }
  }
  m.integration_grid = grid_points(settings.n4);
  if (settings.n5 != settings.n4) m.nonneg_grid = grid_points(settings.n5);
  m.data.u = data.u;
  m.data.v = data.v;
}

LossEngine::~LossEngine() = default;
LossEngine::LossEngine(LossEngine&&) noexcept = default;
LossEngine& LossEngine::operator=(LossEngine&&) noexcept = default;

LossBreakdown LossEngine::evaluate(const CopulaNet& net) const { return impl_->run(net, nullptr); }

LossBreakdown LossEngine::evaluate(const CopulaNet& net, std::vector<double>& grad) const {
  return impl_->run(net, &grad);
}

const LossSettings& LossEngine::settings() const { return impl_->settings; }

LossBreakdown total_loss(const CopulaNet& net, const TrainingSet& data, const LossSettings& settings) {
  return LossEngine(settings, data).evaluate(net);
}

}  // namespace copulacd
