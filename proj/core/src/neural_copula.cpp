#include "copulacd/neural_copula.hpp"

#include <cmath>
#include <random>

#include "copulacd/error.hpp"
#include "net_kernel.hpp"

namespace copulacd {

namespace detail {

namespace {

// f, f', f'' of the activation at every entry of `a`.
void activation_derivs(Activation kind, const Eigen::Ref<const Mat>& a, Arr& f, Arr& d1, Arr& d2) {
  switch (kind) {
    case Activation::tanh:
      // Eigen's tanh is scalar for double; exp is vectorized.
      f = (2.0 * a.array().max(-20.0).min(20.0)).exp();
      f = (f - 1.0) / (f + 1.0);
      d1 = 1.0 - f.square();
      d2 = -2.0 * f * d1;
      break;
    case Activation::sigmoid:
      f = 1.0 / (1.0 + (-a.array()).exp());
      d1 = f * (1.0 - f);
      d2 = d1 * (1.0 - 2.0 * f);
      break;
    case Activation::identity:
      f = a.array();
      d1.setOnes(a.rows(), a.cols());
      d2.setZero(a.rows(), a.cols());
      break;
  }
}

// Third derivative from the cached lower ones.
Arr third_derivative(Activation kind, const Arr& f, const Arr& d1, const Arr& d2) {
  switch (kind) {
    case Activation::tanh: return -2.0 * (d1.square() + f * d2);
    case Activation::sigmoid: return d2 * (1.0 - 2.0 * f) - 2.0 * d1.square();
    case Activation::identity: return Arr::Zero(f.rows(), f.cols());
  }
  return {};
}

void layer_activation(const CopulaNet& net, bool is_output, const Eigen::Ref<const Mat>& a, Arr& f, Arr& d1, Arr& d2) {
  if (!is_output) {
    activation_derivs(net.hidden, a, f, d1, d2);
    return;
  }
  if (net.output == OutputActivation::identity) {
    activation_derivs(Activation::identity, a, f, d1, d2);
    return;
  }
  activation_derivs(Activation::sigmoid, a, f, d1, d2);
  const double scale = 1.0 + 2.0 * net.output_margin;
  f = scale * f - net.output_margin;
  d1 *= scale;
  d2 *= scale;
}

Arr layer_third(const CopulaNet& net, bool is_output, const Arr& f, const Arr& d1, const Arr& d2) {
  if (!is_output) return third_derivative(net.hidden, f, d1, d2);
  if (net.output == OutputActivation::identity) return Arr::Zero(f.rows(), f.cols());
  // Undo the output scaling to reuse the sigmoid identities.
  const double scale = 1.0 + 2.0 * net.output_margin;
  const Arr sf = (f + net.output_margin) / scale;
  return scale * third_derivative(Activation::sigmoid, sf, d1 / scale, d2 / scale);
}

Eigen::Map<const Mat> weight_map(const CopulaNet& net, std::size_t l) {
  return {net.params.data() + net.weight_offset(l), net.layer_sizes[l + 1], net.layer_sizes[l]};
}

Eigen::Map<const Eigen::VectorXd> bias_map(const CopulaNet& net, std::size_t l) {
  return {net.params.data() + net.bias_offset(l), net.layer_sizes[l + 1]};
}

}  // namespace

void forward(const CopulaNet& net, std::span<const double> us, std::span<const double> vs, bool derivs, Tape& tape) {
  const auto b = static_cast<Eigen::Index>(us.size());
  const std::size_t layers = net.layer_count();
  tape.batch = b;
  tape.derivs = derivs;
  tape.inputs.resize(layers);
  tape.pre.resize(layers);
  tape.f.resize(layers);
  tape.d1.resize(layers);
  tape.d2.resize(layers);

  Mat& x = tape.inputs[0];
  x.setZero(2, tape.stride());
  for (Eigen::Index i = 0; i < b; ++i) {
    x(0, i) = us[static_cast<std::size_t>(i)];
    x(1, i) = vs[static_cast<std::size_t>(i)];
  }
  if (derivs) {
    x.row(0).segment(b, b).setOnes();
    x.row(1).segment(2 * b, b).setOnes();
  }

  for (std::size_t l = 0; l < layers; ++l) {
    const bool is_output = l + 1 == layers;
    Mat& a = tape.pre[l];
    // Owned copies keep Eigen's kernels independent of the params' address,
    // which otherwise changes the rounding of the products between runs.
    const Mat w = weight_map(net, l);
    const Eigen::VectorXd bias = bias_map(net, l);
    a.noalias() = w * tape.inputs[l];
    a.leftCols(b).colwise() += bias;
    Arr& f = tape.f[l];
    Arr& d1 = tape.d1[l];
    Arr& d2 = tape.d2[l];
    layer_activation(net, is_output, a.leftCols(b), f, d1, d2);

    Mat& h = is_output ? tape.out : tape.inputs[l + 1];
    h.resize(a.rows(), a.cols());
    h.leftCols(b) = f.matrix();
    if (derivs) {
      const auto au = a.middleCols(b, b).array();
      const auto av = a.middleCols(2 * b, b).array();
      const auto auv = a.middleCols(3 * b, b).array();
      h.middleCols(b, b).array() = d1 * au;
      h.middleCols(2 * b, b).array() = d1 * av;
      h.middleCols(3 * b, b).array() = d2 * au * av + d1 * auv;
    }
  }
}

void backward(const CopulaNet& net, Tape& tape, std::span<const double> g_c, std::span<const double> g_duv,
              std::span<double> grad) {
  const Eigen::Index b = tape.batch;
  const std::size_t layers = net.layer_count();
  Mat& g = tape.g;
  Mat& ga = tape.ga;

  g.setZero(1, tape.stride());
  for (Eigen::Index i = 0; i < b; ++i) g(0, i) = g_c[static_cast<std::size_t>(i)];
  if (tape.derivs && !g_duv.empty()) {
    for (Eigen::Index i = 0; i < b; ++i) g(0, 3 * b + i) = g_duv[static_cast<std::size_t>(i)];
  }

  for (std::size_t l = layers; l-- > 0;) {
    const bool is_output = l + 1 == layers;
    const Mat& a = tape.pre[l];
    const Arr& d1 = tape.d1[l];
    const Arr& d2 = tape.d2[l];
    ga.resize(a.rows(), a.cols());
    if (!tape.derivs) {
      ga.array() = g.array() * d1;
    } else {
      const Arr d3 = layer_third(net, is_output, tape.f[l], d1, d2);
      const auto au = a.middleCols(b, b).array();
      const auto av = a.middleCols(2 * b, b).array();
      const auto auv = a.middleCols(3 * b, b).array();
      const auto gh = g.leftCols(b).array();
      const auto ghu = g.middleCols(b, b).array();
      const auto ghv = g.middleCols(2 * b, b).array();
      const auto ghuv = g.middleCols(3 * b, b).array();
      ga.leftCols(b).array() = gh * d1 + d2 * (ghu * au + ghv * av) + ghuv * (d3 * au * av + d2 * auv);
      ga.middleCols(b, b).array() = ghu * d1 + ghuv * d2 * av;
      ga.middleCols(2 * b, b).array() = ghv * d1 + ghuv * d2 * au;
      ga.middleCols(3 * b, b).array() = ghuv * d1;
    }

    Eigen::Map<Mat> gw(grad.data() + net.weight_offset(l), net.layer_sizes[l + 1], net.layer_sizes[l]);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + net.bias_offset(l), net.layer_sizes[l + 1]);
    const Mat gw_l = ga * tape.inputs[l].transpose();
    const Eigen::VectorXd gb_l = ga.leftCols(b).rowwise().sum();
    gw += gw_l;
    gb += gb_l;
    if (l > 0) {
      const Mat w = weight_map(net, l);
      g.noalias() = w.transpose() * ga;
    }
  }
}

}  // namespace detail

std::string to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "?";
}

std::string to_string(OutputActivation a) {
  return a == OutputActivation::scaled_sigmoid ? "scaled_sigmoid" : "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "identity") return Activation::identity;
  throw UsageError("unknown activation '" + name + "'");
}

OutputActivation parse_output_activation(const std::string& name) {
  if (name == "scaled_sigmoid") return OutputActivation::scaled_sigmoid;
  if (name == "identity") return OutputActivation::identity;
  throw UsageError("unknown output activation '" + name + "'");
}

std::size_t CopulaNet::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    off += static_cast<std::size_t>(layer_sizes[l] + 1) * static_cast<std::size_t>(layer_sizes[l + 1]);
  }
  return off;
}

std::size_t CopulaNet::bias_offset(std::size_t layer) const {
  return weight_offset(layer) + static_cast<std::size_t>(layer_sizes[layer]) * static_cast<std::size_t>(layer_sizes[layer + 1]);
}

double& CopulaNet::weight(std::size_t layer, int row, int col) {
  return params[weight_offset(layer) + static_cast<std::size_t>(col) * layer_sizes[layer + 1] + row];
}

double CopulaNet::weight(std::size_t layer, int row, int col) const {
  return params[weight_offset(layer) + static_cast<std::size_t>(col) * layer_sizes[layer + 1] + row];
}

double& CopulaNet::bias(std::size_t layer, int row) { return params[bias_offset(layer) + static_cast<std::size_t>(row)]; }

void CopulaNet::validate() const {
  if (layer_sizes.size() < 2 || layer_sizes.front() != 2 || layer_sizes.back() != 1) {
    throw UsageError("copula network must map 2 inputs to 1 output");
  }
  for (const int s : layer_sizes) {
    if (s < 1) throw UsageError("layer sizes must be positive");
  }
  if (params.size() != parameter_count(layer_sizes)) throw UsageError("parameter vector length mismatch");
  if (!(output_margin >= 0.0)) throw UsageError("output margin must be non-negative");
}

std::size_t parameter_count(std::span<const int> layer_sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += static_cast<std::size_t>(layer_sizes[l] + 1) * static_cast<std::size_t>(layer_sizes[l + 1]);
  }
  return n;
}

std::vector<int> default_layer_sizes(int width, int hidden_layers) {
  std::vector<int> sizes{2};
  for (int i = 0; i < hidden_layers; ++i) sizes.push_back(width);
  sizes.push_back(1);
  return sizes;
}

CopulaNet init_net(std::vector<int> layer_sizes, std::uint64_t seed, Activation hidden, OutputActivation output) {
  CopulaNet net;
  net.layer_sizes = std::move(layer_sizes);
  net.hidden = hidden;
  net.output = output;
  net.params.assign(parameter_count(net.layer_sizes), 0.0);
  net.validate();
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const int fan_in = net.layer_sizes[l];
    const int fan_out = net.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (int c = 0; c < fan_in; ++c)
      for (int r = 0; r < fan_out; ++r) net.weight(l, r, c) = dist(rng);
  }
  return net;
}

std::vector<CopulaEval> forward_with_derivs(const CopulaNet& net, std::span<const double> us,
                                            std::span<const double> vs, double rho) {
  if (us.size() != vs.size()) throw UsageError("u and v batches differ in length");
  net.validate();
  std::vector<CopulaEval> out(us.size());
  if (us.empty()) return out;
  detail::Tape tape;
  detail::forward(net, us, vs, true, tape);
  for (std::size_t i = 0; i < us.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    CopulaEval& e = out[i];
    e.c = tape.c(k);
    e.du = tape.du(k);
    e.dv = tape.dv(k);
    e.duv = tape.duv(k);
    if (!std::isfinite(e.c) || !std::isfinite(e.du) || !std::isfinite(e.dv) || !std::isfinite(e.duv)) {
      throw NumericalError("non-finite network output; weights have diverged");
    }
    e.pdf = std::max(e.duv, 0.0) + rho;
  }
  return out;
}

CopulaEval forward_with_derivs(const CopulaNet& net, double u, double v, double rho) {
  return forward_with_derivs(net, std::span<const double>(&u, 1), std::span<const double>(&v, 1), rho).front();
}

double evaluate_cdf(const CopulaNet& net, double u, double v) { return forward_with_derivs(net, u, v).c; }

}  // namespace copulacd
