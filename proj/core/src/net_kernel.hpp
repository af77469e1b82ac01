#pragma once

// Batched evaluation of CopulaNet carrying (value, d/du, d/dv, d2/dudv)
// through every layer, plus the matching reverse pass for parameter
// gradients. Columns of each stacked matrix are laid out as
// [value | d/du | d/dv | d2/dudv], batch wide each.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "copulacd/neural_copula.hpp"

namespace copulacd::detail {

using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXXd;

/// Forward record of one batch. Buffers are reused when a Tape is passed to
/// forward() again with the same shape.
struct Tape {
  Eigen::Index batch = 0;
  bool derivs = true;
  std::vector<Mat> inputs;  // input to layer l (stacked)
  std::vector<Mat> pre;     // pre-activation of layer l (stacked)
  std::vector<Arr> f, d1, d2;  // activation and its derivatives at the value block
  Mat out;                  // network output (stacked)

  // backward scratch
  Mat g, ga;

  Eigen::Index stride() const { return derivs ? 4 * batch : batch; }
  double c(Eigen::Index i) const { return out(0, i); }
  double du(Eigen::Index i) const { return out(0, batch + i); }
  double dv(Eigen::Index i) const { return out(0, 2 * batch + i); }
  double duv(Eigen::Index i) const { return out(0, 3 * batch + i); }
};

void forward(const CopulaNet& net, std::span<const double> us, std::span<const double> vs, bool derivs, Tape& tape);

/// Accumulates into `grad` (length params.size()) the gradient of
/// sum_i g_c[i] * C_i + g_duv[i] * duv_i. g_duv may be empty when the tape
/// was recorded without derivatives or when only C matters.
void backward(const CopulaNet& net, Tape& tape, std::span<const double> g_c, std::span<const double> g_duv,
              std::span<double> grad);

}  // namespace copulacd::detail
