#include "ccc/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ccc::kernels {

namespace {

constexpr double kConstantColumnSd = 1e-12;

void check_forward(const Matrix& in, const Matrix& weights, std::span<const double> bias) {
  if (in.cols() != weights.cols() || bias.size() != weights.rows())
    throw std::invalid_argument("dense_forward: shape mismatch");
}

inline double activate(double v, Activation act) { return act == Activation::tanh ? std::tanh(v) : v; }

inline double derivative_from_output(double y, Activation act) { return act == Activation::tanh ? 1.0 - y * y : 1.0; }

inline void forward_row(std::span<const double> x, const Matrix& weights, std::span<const double> bias,
                        Activation act, std::span<double> y) {
  const std::size_t in_w = weights.cols();
  for (std::size_t o = 0; o < weights.rows(); ++o) {
    auto w = weights.row(o);
    double s = bias[o];
    for (std::size_t i = 0; i < in_w; ++i) s += w[i] * x[i];
    y[o] = activate(s, act);
  }
}

inline void column_zscore(Matrix& m, std::size_t c) {
  const std::size_t n = m.rows();
  if (n == 0) return;
  double mean = 0.0;
  for (std::size_t r = 0; r < n; ++r) mean += m(r, c);
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double d = m(r, c) - mean;
    var += d * d;
  }
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (std::size_t r = 0; r < n; ++r) m(r, c) = sd < kConstantColumnSd ? 0.0 : (m(r, c) - mean) / sd;
}

}  // namespace

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void dense_forward(const Matrix& in, const Matrix& weights, std::span<const double> bias, Activation act,
                   Matrix& out) {
  check_forward(in, weights, bias);
  if (out.rows() != in.rows() || out.cols() != weights.rows()) out = Matrix(in.rows(), weights.rows());
  const auto n = static_cast<std::ptrdiff_t>(in.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) forward_row(in.row(r), weights, bias, act, out.row(r));
}

void dense_backward(const Matrix& in, const Matrix& out, const Matrix& grad_out, const Matrix& weights,
                    Activation act, Matrix* grad_in, Matrix& grad_weights, std::vector<double>& grad_bias) {
  const std::size_t n = in.rows(), in_w = weights.cols(), out_w = weights.rows();
  if (grad_in) *grad_in = Matrix(n, in_w);
  grad_weights = Matrix(out_w, in_w);
  grad_bias.assign(out_w, 0.0);
  if (n == 0) return;

  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  const std::size_t stride = out_w * in_w + out_w;
  std::vector<double> partial(blocks * stride, 0.0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    double* gw = partial.data() + static_cast<std::size_t>(b) * stride;
    double* gb = gw + out_w * in_w;
    std::vector<double> delta(out_w);
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    for (std::size_t r = lo; r < hi; ++r) {
      auto x = in.row(r);
      for (std::size_t o = 0; o < out_w; ++o) delta[o] = grad_out(r, o) * derivative_from_output(out(r, o), act);
      for (std::size_t o = 0; o < out_w; ++o) {
        gb[o] += delta[o];
        double* gwo = gw + o * in_w;
        for (std::size_t i = 0; i < in_w; ++i) gwo[i] += delta[o] * x[i];
      }
      if (grad_in) {
        auto gx = grad_in->row(r);
        for (std::size_t o = 0; o < out_w; ++o) {
          auto w = weights.row(o);
          for (std::size_t i = 0; i < in_w; ++i) gx[i] += delta[o] * w[i];
        }
      }
    }
  }

  auto& gw = grad_weights.data();
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* p = partial.data() + b * stride;
    for (std::size_t i = 0; i < out_w * in_w; ++i) gw[i] += p[i];
    for (std::size_t o = 0; o < out_w; ++o) grad_bias[o] += p[out_w * in_w + o];
  }
}

void zscore_columns(Matrix& m) {
  const auto cols = static_cast<std::ptrdiff_t>(m.cols());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < cols; ++c) column_zscore(m, static_cast<std::size_t>(c));
}

Matrix half_sq_costs(std::span<const double> latents, std::span<const double> centers) {
  Matrix out(latents.size(), centers.size());
  const auto n = static_cast<std::ptrdiff_t>(latents.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    for (std::size_t h = 0; h < centers.size(); ++h) {
      const double d = latents[j] - centers[h];
      out(j, h) = 0.5 * d * d;
    }
  }
  return out;
}

namespace serial {

void dense_forward(const Matrix& in, const Matrix& weights, std::span<const double> bias, Activation act,
                   Matrix& out) {
  check_forward(in, weights, bias);
  out = Matrix(in.rows(), weights.rows());
  for (std::size_t r = 0; r < in.rows(); ++r) forward_row(in.row(r), weights, bias, act, out.row(r));
}

void dense_backward(const Matrix& in, const Matrix& out, const Matrix& grad_out, const Matrix& weights,
                    Activation act, Matrix* grad_in, Matrix& grad_weights, std::vector<double>& grad_bias) {
  const std::size_t n = in.rows(), in_w = weights.cols(), out_w = weights.rows();
  if (grad_in) *grad_in = Matrix(n, in_w);
  grad_weights = Matrix(out_w, in_w);
  grad_bias.assign(out_w, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t o = 0; o < out_w; ++o) {
      const double delta = grad_out(r, o) * derivative_from_output(out(r, o), act);
      grad_bias[o] += delta;
      for (std::size_t i = 0; i < in_w; ++i) {
        grad_weights(o, i) += delta * in(r, i);
        if (grad_in) (*grad_in)(r, i) += delta * weights(o, i);
      }
    }
  }
}

void zscore_columns(Matrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) column_zscore(m, c);
}

Matrix half_sq_costs(std::span<const double> latents, std::span<const double> centers) {
  Matrix out(latents.size(), centers.size());
  for (std::size_t j = 0; j < latents.size(); ++j)
    for (std::size_t h = 0; h < centers.size(); ++h) out(j, h) = 0.5 * (latents[j] - centers[h]) * (latents[j] - centers[h]);
  return out;
}

}  // namespace serial

}  // namespace ccc::kernels
