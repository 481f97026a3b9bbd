#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccc/kernels.hpp"
#include "ccc/matrix.hpp"

namespace ccc {

using kernels::Activation;

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::linear;

  std::size_t in_width() const { return weights.cols(); }
  std::size_t out_width() const { return weights.rows(); }
  bool operator==(const DenseLayer&) const = default;
};

// Fully connected autoencoder. The latent has one channel per clustered
// indicator: 0 = roof, 1 = wall, 2 = height.
struct NetworkParameters {
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> decoder;
  std::uint64_t seed = 0;

  // 14 -> 10 -> 6 -> 3 with tanh hidden layers, linear latent and output,
  // decoder mirrored. Glorot-uniform weights, zero biases.
  static NetworkParameters initialize(std::uint64_t seed, const std::vector<std::size_t>& widths = {14, 10, 6, 3});
  // Same shapes, every value zero (gradient accumulator).
  NetworkParameters zeros_like() const;

  std::size_t input_width() const { return encoder.front().in_width(); }
  std::size_t latent_width() const { return encoder.back().out_width(); }
  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  // Throws std::invalid_argument if shapes do not chain or values are non-finite.
  void validate() const;

  bool operator==(const NetworkParameters&) const = default;
};

struct ForwardPass {
  Matrix input;
  std::vector<Matrix> encoder_out;  // one per encoder layer; back() is the latent
  std::vector<Matrix> decoder_out;  // back() is the reconstruction

  const Matrix& latents() const { return encoder_out.back(); }
  const Matrix& reconstruction() const { return decoder_out.back(); }
};

// Throws NumericalError on non-finite activations.
Matrix encode(const NetworkParameters& params, const Matrix& x);
Matrix decode(const NetworkParameters& params, const Matrix& z);
ForwardPass forward(const NetworkParameters& params, const Matrix& x);

// (1/|M|) * sum over pixels of the squared error summed over features.
double reconstruction_loss(const Matrix& x, const Matrix& x_hat);
// d reconstruction_loss / d x_hat
Matrix reconstruction_loss_gradient(const Matrix& x, const Matrix& x_hat);

// Gradients of a scalar loss given its partial derivatives with respect to
// the reconstruction and to the latent (either may be empty = zero).
NetworkParameters backward(const NetworkParameters& params, const ForwardPass& pass, const Matrix& grad_reconstruction,
                           const Matrix& grad_latent);
NetworkParameters backward_serial(const NetworkParameters& params, const ForwardPass& pass,
                                  const Matrix& grad_reconstruction, const Matrix& grad_latent);

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long long step = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.80;  // gradient decay factor
  double beta2 = 0.95;  // squared gradient decay factor
  double epsilon = 1e-8;

  static AdamState for_parameters(const NetworkParameters& params);
  bool operator==(const AdamState&) const = default;
};

void adam_step(NetworkParameters& params, const NetworkParameters& grads, AdamState& state);

struct Checkpoint {
  NetworkParameters params;
  AdamState adam;
  long long epoch = 0;

  std::string serialize() const;
  static Checkpoint parse(std::string_view text, const std::string& origin = "<memory>");
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
  bool operator==(const Checkpoint&) const = default;
};

}  // namespace ccc
