#include "ccc/autoencoder.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"

namespace ccc {

namespace {

constexpr std::string_view kCheckpointMagic = "ccc-checkpoint";
constexpr int kCheckpointVersion = 1;

// Uniform in [0,1) from the top 53 bits; independent of the standard
// library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

DenseLayer glorot_layer(std::size_t in, std::size_t out, Activation act, std::mt19937_64& rng) {
  DenseLayer layer{Matrix(out, in), std::vector<double>(out, 0.0), act};
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& w : layer.weights.data()) w = (2.0 * unit_uniform(rng) - 1.0) * limit;
  return layer;
}

void check_finite(const Matrix& m, std::string_view stage, std::size_t layer) {
  for (double v : m.data())
    if (!std::isfinite(v))
      throw NumericalError("non-finite activation in " + std::string(stage) + " layer " + std::to_string(layer));
}

Matrix run(const std::vector<DenseLayer>& layers, const Matrix& x, std::vector<Matrix>* trace, std::string_view stage) {
  Matrix cur = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix next;
    kernels::dense_forward(cur, layers[l].weights, layers[l].bias, layers[l].activation, next);
    check_finite(next, stage, l);
    if (trace) trace->push_back(next);
    cur = std::move(next);
  }
  return cur;
}

std::string_view activation_name(Activation a) { return a == Activation::tanh ? "tanh" : "linear"; }

Activation parse_activation(std::string_view s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  throw ValidationError("checkpoint: unknown activation '" + std::string(s) + "'");
}

template <class Backward>
NetworkParameters backward_impl(const NetworkParameters& params, const ForwardPass& pass,
                                const Matrix& grad_reconstruction, const Matrix& grad_latent, Backward&& layer_backward) {
  NetworkParameters grads = params.zeros_like();
  const std::size_t n = pass.input.rows();
  const std::size_t nd = params.decoder.size(), ne = params.encoder.size();

  Matrix upstream = grad_reconstruction.empty() ? Matrix(n, pass.reconstruction().cols()) : grad_reconstruction;
  for (std::size_t k = nd; k-- > 0;) {
    const Matrix& in = k == 0 ? pass.latents() : pass.decoder_out[k - 1];
    Matrix grad_in;
    layer_backward(in, pass.decoder_out[k], upstream, params.decoder[k].weights, params.decoder[k].activation, &grad_in,
                   grads.decoder[k].weights, grads.decoder[k].bias);
    upstream = std::move(grad_in);
  }
  if (!grad_latent.empty()) {
    if (grad_latent.rows() != upstream.rows() || grad_latent.cols() != upstream.cols())
      throw std::invalid_argument("backward: latent gradient shape mismatch");
    for (std::size_t i = 0; i < upstream.size(); ++i) upstream.data()[i] += grad_latent.data()[i];
  }
  for (std::size_t k = ne; k-- > 0;) {
    const Matrix& in = k == 0 ? pass.input : pass.encoder_out[k - 1];
    Matrix grad_in;
    layer_backward(in, pass.encoder_out[k], upstream, params.encoder[k].weights, params.encoder[k].activation,
                   k == 0 ? nullptr : &grad_in, grads.encoder[k].weights, grads.encoder[k].bias);
    upstream = std::move(grad_in);
  }
  return grads;
}

}  // namespace

NetworkParameters NetworkParameters::initialize(std::uint64_t seed, const std::vector<std::size_t>& widths) {
  if (widths.size() < 2) throw std::invalid_argument("initialize: need at least input and latent widths");
  std::mt19937_64 rng(seed);
  NetworkParameters p;
  p.seed = seed;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    bool last = i + 2 == widths.size();
    p.encoder.push_back(glorot_layer(widths[i], widths[i + 1], last ? Activation::linear : Activation::tanh, rng));
  }
  for (std::size_t i = widths.size() - 1; i > 0; --i) {
    bool last = i == 1;
    p.decoder.push_back(glorot_layer(widths[i], widths[i - 1], last ? Activation::linear : Activation::tanh, rng));
  }
  return p;
}

NetworkParameters NetworkParameters::zeros_like() const {
  NetworkParameters z = *this;
  for (auto* part : {&z.encoder, &z.decoder})
    for (auto& l : *part) {
      std::fill(l.weights.data().begin(), l.weights.data().end(), 0.0);
      std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
  return z;
}

std::size_t NetworkParameters::parameter_count() const {
  std::size_t n = 0;
  for (const auto* part : {&encoder, &decoder})
    for (const auto& l : *part) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> NetworkParameters::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto* part : {&encoder, &decoder})
    for (const auto& l : *part) {
      out.insert(out.end(), l.weights.data().begin(), l.weights.data().end());
      out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
  return out;
}

void NetworkParameters::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("assign: parameter count mismatch");
  std::size_t k = 0;
  for (auto* part : {&encoder, &decoder})
    for (auto& l : *part) {
      for (double& w : l.weights.data()) w = flat[k++];
      for (double& b : l.bias) b = flat[k++];
    }
}

void NetworkParameters::validate() const {
  if (encoder.empty() || decoder.empty()) throw std::invalid_argument("network: empty encoder or decoder");
  auto chain = [](const std::vector<DenseLayer>& layers) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].bias.size() != layers[i].out_width()) throw std::invalid_argument("network: bias width");
      if (i && layers[i].in_width() != layers[i - 1].out_width()) throw std::invalid_argument("network: widths do not chain");
    }
  };
  chain(encoder);
  chain(decoder);
  if (decoder.front().in_width() != encoder.back().out_width() || decoder.back().out_width() != encoder.front().in_width())
    throw std::invalid_argument("network: decoder does not mirror encoder");
  for (double v : flatten())
    if (!std::isfinite(v)) throw std::invalid_argument("network: non-finite parameter");
}

Matrix encode(const NetworkParameters& params, const Matrix& x) {
  if (x.cols() != params.input_width()) throw std::invalid_argument("encode: input has wrong width");
  return run(params.encoder, x, nullptr, "encoder");
}

Matrix decode(const NetworkParameters& params, const Matrix& z) {
  if (z.cols() != params.latent_width()) throw std::invalid_argument("decode: latent has wrong width");
  return run(params.decoder, z, nullptr, "decoder");
}

ForwardPass forward(const NetworkParameters& params, const Matrix& x) {
  if (x.cols() != params.input_width()) throw std::invalid_argument("forward: input has wrong width");
  ForwardPass pass;
  pass.input = x;
  Matrix z = run(params.encoder, x, &pass.encoder_out, "encoder");
  run(params.decoder, z, &pass.decoder_out, "decoder");
  return pass;
}

double reconstruction_loss(const Matrix& x, const Matrix& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) throw std::invalid_argument("reconstruction_loss: shape");
  if (x.rows() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.data()[i] - x_hat.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(x.rows());
}

Matrix reconstruction_loss_gradient(const Matrix& x, const Matrix& x_hat) {
  Matrix g(x.rows(), x.cols());
  if (x.rows() == 0) return g;
  const double scale = 2.0 / static_cast<double>(x.rows());
  for (std::size_t i = 0; i < x.size(); ++i) g.data()[i] = scale * (x_hat.data()[i] - x.data()[i]);
  return g;
}

NetworkParameters backward(const NetworkParameters& params, const ForwardPass& pass, const Matrix& grad_reconstruction,
                           const Matrix& grad_latent) {
  return backward_impl(params, pass, grad_reconstruction, grad_latent,
                       [](auto&&... a) { kernels::dense_backward(a...); });
}

NetworkParameters backward_serial(const NetworkParameters& params, const ForwardPass& pass,
                                  const Matrix& grad_reconstruction, const Matrix& grad_latent) {
  return backward_impl(params, pass, grad_reconstruction, grad_latent,
                       [](auto&&... a) { kernels::serial::dense_backward(a...); });
}

AdamState AdamState::for_parameters(const NetworkParameters& params) {
  AdamState s;
  s.first_moment.assign(params.parameter_count(), 0.0);
  s.second_moment.assign(params.parameter_count(), 0.0);
  return s;
}

void adam_step(NetworkParameters& params, const NetworkParameters& grads, AdamState& state) {
  auto theta = params.flatten();
  const auto g = grads.flatten();
  if (g.size() != theta.size() || state.first_moment.size() != theta.size() ||
      state.second_moment.size() != theta.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g[i];
    v = state.beta2 * v + (1.0 - state.beta2) * g[i] * g[i];
    theta[i] -= state.learning_rate * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
  }
  params.assign(theta);
}

std::string Checkpoint::serialize() const {
  std::ostringstream out;
  auto values = [&](std::string_view tag, const auto& v) {
    out << tag << ' ' << v.size();
    for (double x : v) out << ' ' << csv::format_double(x);
    out << '\n';
  };
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "seed " << params.seed << '\n';
  out << "epoch " << epoch << '\n';
  out << "adam " << adam.step << ' ' << csv::format_double(adam.learning_rate) << ' ' << csv::format_double(adam.beta1)
      << ' ' << csv::format_double(adam.beta2) << ' ' << csv::format_double(adam.epsilon) << '\n';
  out << "layers " << params.encoder.size() << ' ' << params.decoder.size() << '\n';
  for (const auto* part : {&params.encoder, &params.decoder}) {
    for (const auto& l : *part) {
      out << "layer " << (part == &params.encoder ? "encoder" : "decoder") << ' ' << l.out_width() << ' '
          << l.in_width() << ' ' << activation_name(l.activation) << '\n';
      values("weights", l.weights.data());
      values("bias", l.bias);
    }
  }
  values("adam_m", adam.first_moment);
  values("adam_v", adam.second_moment);
  out << "end\n";
  return out.str();
}

Checkpoint Checkpoint::parse(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  auto fail = [&](const std::string& why) { return ValidationError(origin + ": " + why); };
  auto expect = [&](std::string_view key) {
    std::string k;
    if (!(in >> k) || k != key) throw fail("expected '" + std::string(key) + "'");
  };
  auto number = [&]() {
    std::string tok;
    if (!(in >> tok)) throw fail("truncated");
    return csv::parse_double(tok, origin);
  };
  auto integer = [&]() {
    std::string tok;
    if (!(in >> tok)) throw fail("truncated");
    return csv::parse_integer(tok, origin);
  };
  auto read_values = [&](std::string_view tag, std::size_t expected) {
    expect(tag);
    auto n = static_cast<std::size_t>(integer());
    if (n != expected) throw fail(std::string(tag) + " has " + std::to_string(n) + " values, expected " +
                                  std::to_string(expected));
    std::vector<double> v(n);
    for (auto& x : v) x = number();
    return v;
  };

  Checkpoint c;
  expect(kCheckpointMagic);
  if (integer() != kCheckpointVersion) throw fail("unsupported checkpoint version");
  expect("seed");
  std::string seed_tok;
  in >> seed_tok;
  try {
    c.params.seed = std::stoull(seed_tok);
  } catch (const std::exception&) {
    throw fail("bad seed");
  }
  expect("epoch");
  c.epoch = integer();
  expect("adam");
  c.adam.step = integer();
  c.adam.learning_rate = number();
  c.adam.beta1 = number();
  c.adam.beta2 = number();
  c.adam.epsilon = number();
  expect("layers");
  const auto ne = static_cast<std::size_t>(integer());
  const auto nd = static_cast<std::size_t>(integer());
  for (std::size_t i = 0; i < ne + nd; ++i) {
    expect("layer");
    std::string part, act;
    in >> part;
    if (part != (i < ne ? "encoder" : "decoder")) throw fail("layer order");
    auto rows = static_cast<std::size_t>(integer());
    auto cols = static_cast<std::size_t>(integer());
    in >> act;
    DenseLayer l;
    l.activation = parse_activation(act);
    l.weights = Matrix(rows, cols, read_values("weights", rows * cols));
    l.bias = read_values("bias", rows);
    (i < ne ? c.params.encoder : c.params.decoder).push_back(std::move(l));
  }
  const std::size_t np = c.params.parameter_count();
  c.adam.first_moment = read_values("adam_m", np);
  c.adam.second_moment = read_values("adam_v", np);
  expect("end");
  try {
    c.params.validate();
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const { csv::write_file(path, serialize()); }

Checkpoint Checkpoint::load(const std::filesystem::path& path) { return parse(csv::read_file(path), path.string()); }

}  // namespace ccc
