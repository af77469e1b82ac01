#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace copulacd {

enum class Activation { tanh, sigmoid, identity };
enum class OutputActivation { scaled_sigmoid, identity };

std::string to_string(Activation a);
std::string to_string(OutputActivation a);
Activation parse_activation(const std::string& name);
OutputActivation parse_output_activation(const std::string& name);

/// Fully connected network C(u, v) with a scalar output.
///
/// Parameters are stored flat, layer by layer: the weight matrix
/// (out x in, column-major) followed by the bias vector (out).
struct CopulaNet {
  std::vector<int> layer_sizes;
  std::vector<double> params;
  Activation hidden = Activation::tanh;
  OutputActivation output = OutputActivation::scaled_sigmoid;
  /// The scaled sigmoid maps onto [-margin, 1 + margin] so that 0 and 1 are
  /// reachable with finite pre-activations.
  double output_margin = 0.02;

  std::size_t layer_count() const { return layer_sizes.empty() ? 0 : layer_sizes.size() - 1; }
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;
  double& weight(std::size_t layer, int row, int col);
  double weight(std::size_t layer, int row, int col) const;
  double& bias(std::size_t layer, int row);

  /// Throws UsageError when sizes are not [2, ..., 1] or params has the wrong length.
  void validate() const;

  friend bool operator==(const CopulaNet&, const CopulaNet&) = default;
};

/// Sum over layers of (fan_in + 1) * fan_out.
std::size_t parameter_count(std::span<const int> layer_sizes);

/// The 5 x 20 hidden-layer default: [2, 20, 20, 20, 20, 20, 1].
std::vector<int> default_layer_sizes(int width = 20, int hidden_layers = 5);

/// Glorot-uniform weights, zero biases, deterministic per seed.
CopulaNet init_net(std::vector<int> layer_sizes, std::uint64_t seed, Activation hidden = Activation::tanh,
                   OutputActivation output = OutputActivation::scaled_sigmoid);

inline constexpr double kDefaultRho = 1e-9;

/// CDF value, first partials and the mixed partial of C at one point.
struct CopulaEval {
  double c = 0.0;
  double du = 0.0;
  double dv = 0.0;
  double duv = 0.0;
  /// max(duv, 0) + rho
  double pdf = 0.0;
};

/// Exact forward-mode propagation of (value, d/du, d/dv, d2/dudv).
/// Throws NumericalError if any output is non-finite.
CopulaEval forward_with_derivs(const CopulaNet& net, double u, double v, double rho = kDefaultRho);

/// Batched variant of forward_with_derivs; us and vs must have equal length.
std::vector<CopulaEval> forward_with_derivs(const CopulaNet& net, std::span<const double> us,
                                            std::span<const double> vs, double rho = kDefaultRho);

/// Network output only.
double evaluate_cdf(const CopulaNet& net, double u, double v);

}  // namespace copulacd
