#include "doctest.h"

#include <map>
#include <random>

#include "ccc/kernels.hpp"

using namespace ccc;
namespace k = ccc::kernels;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = n(rng);
  return m;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12).scale(1.0));
}

// Row counts around the reduction block size.
const std::vector<std::size_t> kRows{1, 5, k::kReductionBlock - 1, k::kReductionBlock, k::kReductionBlock + 1, 1000};

}  // namespace

TEST_CASE("parallel kernels match the serial references and ignore the thread count") {
  // Row-wise outputs are bit-identical to the serial loops. Gradient sums over
  // rows are blocked, so they agree with the straight serial sum to rounding
  // and with each other exactly for every thread count.
  const int original = k::threads();
  std::map<std::size_t, std::vector<double>> first_gw;
  for (int t : {1, 2, 3, 8}) {
    k::set_threads(t);
    for (std::size_t rows : kRows) {
      CAPTURE(t);
      CAPTURE(rows);
      const Matrix in = random_matrix(rows, 14, rows);
      const Matrix w = random_matrix(10, 14, rows + 1);
      const std::vector<double> b(10, 0.25);
      for (auto act : {k::Activation::linear, k::Activation::tanh}) {
        Matrix out_p, out_s;
        k::dense_forward(in, w, b, act, out_p);
        k::serial::dense_forward(in, w, b, act, out_s);
        CHECK(out_p == out_s);

        const Matrix grad_out = random_matrix(rows, 10, rows + 2);
        Matrix gi_p, gi_s, gw_p, gw_s;
        std::vector<double> gb_p, gb_s;
        k::dense_backward(in, out_s, grad_out, w, act, &gi_p, gw_p, gb_p);
        k::serial::dense_backward(in, out_s, grad_out, w, act, &gi_s, gw_s, gb_s);
        CHECK(gi_p == gi_s);
        check_close(gw_p.data(), gw_s.data());
        check_close(gb_p, gb_s);
        auto blob = gw_p.data();
        blob.insert(blob.end(), gb_p.begin(), gb_p.end());
        const std::size_t key = rows * 2 + (act == k::Activation::tanh);
        if (!first_gw.count(key)) first_gw[key] = blob;
        CHECK(first_gw[key] == blob);
      }

      Matrix zp = in, zs = in;
      k::zscore_columns(zp);
      k::serial::zscore_columns(zs);
      CHECK(zp == zs);

      const std::vector<double> centers{-1.0, 0.0, 0.5, 2.0};
      CHECK(k::half_sq_costs(in.column(0), centers) == k::serial::half_sq_costs(in.column(0), centers));
    }
  }
  k::set_threads(original);
}

TEST_CASE("dense forward against a hand computation") {
  const Matrix in(1, 2, std::vector<double>{1.0, -2.0});
  const Matrix w(2, 2, std::vector<double>{0.5, 0.25, -1.0, 3.0});
  const std::vector<double> b{0.1, -0.2};
  Matrix out;
  k::serial::dense_forward(in, w, b, k::Activation::linear, out);
  CHECK(out(0, 0) == doctest::Approx(0.5 - 0.5 + 0.1));
  CHECK(out(0, 1) == doctest::Approx(-1.0 - 6.0 - 0.2));
  k::serial::dense_forward(in, w, b, k::Activation::tanh, out);
  CHECK(out(0, 1) == doctest::Approx(std::tanh(-7.2)));
}

TEST_CASE("half squared costs") {
  const std::vector<double> z{0.0, 1.0};
  const std::vector<double> c{0.0, 2.0};
  const auto m = k::serial::half_sq_costs(z, c);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(0, 1) == 2.0);
  CHECK(m(1, 0) == 0.5);
  CHECK(m(1, 1) == 0.5);
}
