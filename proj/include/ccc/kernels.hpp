#pragma once

#include <span>
#include <vector>

#include "ccc/matrix.hpp"

// Data-parallel inner loops. Each kernel has an OpenMP version in
// ccc::kernels and a plain loop in ccc::kernels::serial that the tests use as
// the reference. Reductions over rows are summed per fixed-size row block and
// then in block order, so results do not depend on the thread count.
namespace ccc::kernels {

enum class Activation { linear, tanh };

inline constexpr std::size_t kReductionBlock = 128;

void set_threads(int n);
int threads();

// out = act(in * W^T + b); W is (out_width x in_width).
void dense_forward(const Matrix& in, const Matrix& weights, std::span<const double> bias, Activation act,
                   Matrix& out);

// Given the layer input, its activated output and dLoss/dOutput, produces
// dLoss/dInput (skipped when grad_in is null) and accumulates the weight and
// bias gradients (overwritten, not added).
void dense_backward(const Matrix& in, const Matrix& out, const Matrix& grad_out, const Matrix& weights,
                    Activation act, Matrix* grad_in, Matrix& grad_weights, std::vector<double>& grad_bias);

// Column-wise (v - mean) / population_sd in place; constant columns become 0.
void zscore_columns(Matrix& m);

// cost(j, h) = 0.5 * (z_j - c_h)^2
Matrix half_sq_costs(std::span<const double> latents, std::span<const double> centers);

namespace serial {
void dense_forward(const Matrix& in, const Matrix& weights, std::span<const double> bias, Activation act,
                   Matrix& out);
void dense_backward(const Matrix& in, const Matrix& out, const Matrix& grad_out, const Matrix& weights,
                    Activation act, Matrix* grad_in, Matrix& grad_weights, std::vector<double>& grad_bias);
void zscore_columns(Matrix& m);
Matrix half_sq_costs(std::span<const double> latents, std::span<const double> centers);
}  // namespace serial

}  // namespace ccc::kernels
