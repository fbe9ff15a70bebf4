#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "ba/channel.hpp"
#include "ba/errors.hpp"

using namespace ba;
using namespace ba::channel;
namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd unit_random(int n, Rng& rng) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = {rng.normal(), rng.normal()};
  return v / v.norm();
}
}  // namespace

TEST_CASE("array response fixtures") {
  const Eigen::VectorXcd broadside = array_response(kPi / 2, 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(broadside[k] - std::complex<double>(1, 0)) < 1e-12);
  }
  const Eigen::VectorXcd endfire = array_response(0.0, 4);
  for (int k = 0; k < 4; ++k) {
    const double expect = (k % 2 == 0) ? 1.0 : -1.0;
    CHECK(std::abs(endfire[k] - std::complex<double>(expect, 0)) < 1e-12);
  }
  CHECK(array_response(0.7, 16).norm() == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(std::abs(array_response(1.1, 9)[0] - std::complex<double>(1, 0)) ==
        0.0);
  CHECK_THROWS_AS(array_response(0.0, 0), ContractError);
}

TEST_CASE("path sampling statistics") {
  Rng rng(1);
  const int n = 100000;
  double sum_a2 = 0.0;
  std::vector<double> rx_angles;
  for (const auto& p : sample_paths(n, rng)) {
    sum_a2 += std::norm(p.alpha);
    rx_angles.push_back(p.phi_rx);
    CHECK(p.phi_rx >= -kPi / 2);
    CHECK(p.phi_rx <= kPi / 2);
    CHECK(p.phi_tx >= -kPi / 2);
    CHECK(p.phi_tx <= kPi / 2);
  }
  CHECK(sum_a2 / n == doctest::Approx(1.0).epsilon(0.02));

  // Kolmogorov-Smirnov distance against the uniform CDF.
  std::sort(rx_angles.begin(), rx_angles.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = (rx_angles[i] + kPi / 2) / kPi;
    ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
  }
  CHECK(ks < 0.01);
  CHECK_THROWS_AS(sample_paths(0, rng), ContractError);
}

TEST_CASE("path sampling is deterministic under a fixed seed") {
  Rng a(42), b(42);
  const auto pa = sample_paths(5, a);
  const auto pb = sample_paths(5, b);
  for (int i = 0; i < 5; ++i) {
    CHECK(pa[i].alpha == pb[i].alpha);
    CHECK(pa[i].phi_rx == pb[i].phi_rx);
    CHECK(pa[i].phi_tx == pb[i].phi_tx);
  }
}

TEST_CASE("single-path channel geometry") {
  std::vector<PathParams> paths = {{{1.0, 0.0}, 0.3, -0.7}};
  const Channel ch = assemble_channel(paths, 16, 32);
  CHECK(ch.h.rows() == 16);
  CHECK(ch.h.cols() == 32);
  CHECK(ch.frob_norm == doctest::Approx(std::sqrt(512.0)).epsilon(1e-12));
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ch.h);
  CHECK(svd.singularValues()[1] < 1e-10 * svd.singularValues()[0]);
}

TEST_CASE("channel reconstructs from stored paths") {
  Rng rng(5);
  const Channel ch = sample_channel(3, 16, 32, rng);
  Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(16, 32);
  for (const auto& p : ch.paths) {
    rebuilt += p.alpha * array_response(p.phi_rx, 16).conjugate() *
               array_response(p.phi_tx, 32).transpose();
  }
  CHECK((rebuilt - ch.h).norm() < 1e-10);
  CHECK(std::abs(ch.frob_norm - ch.h.norm()) < 1e-10);
}

TEST_CASE("noiseless propagation on matched steering vectors") {
  const double phi_rx = 0.4, phi_tx = -0.9;
  std::vector<PathParams> paths = {{{0.8, -0.6}, phi_rx, phi_tx}};
  const Channel ch = assemble_channel(paths, 16, 32);
  const Eigen::VectorXcd w_vec =
      array_response(phi_rx, 16).conjugate() / 4.0;
  const Eigen::VectorXcd f_vec =
      array_response(phi_tx, 32).conjugate() / std::sqrt(32.0);
  Rng rng(0);
  const auto y = propagate(ch, ad::make_complex(w_vec),
                           ad::make_complex(f_vec), 0.0, rng);
  const std::complex<double> yv{y.re.values()[0], y.im.values()[0]};
  CHECK(std::abs(yv) ==
        doctest::Approx(std::abs(std::complex<double>(0.8, -0.6)) *
                        std::sqrt(512.0))
            .epsilon(1e-10));
}

TEST_CASE("zero channel propagation") {
  Channel ch;
  ch.h = Eigen::MatrixXcd::Zero(4, 4);
  ch.frob_norm = 0.0;
  Rng rng(3);
  Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(4);
  e1[0] = 1.0;
  const auto w = ad::make_complex(e1);
  const auto f = ad::make_complex(e1);
  const auto y0 = propagate(ch, w, f, 0.0, rng);
  CHECK(y0.re.values()[0] == 0.0);
  CHECK(y0.im.values()[0] == 0.0);

  // With unit noise, |y|^2 averages to sigma^2 ||w||^2 = 1.
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto y = propagate(ch, w, f, 1.0, rng);
    sum += y.re.values()[0] * y.re.values()[0] +
           y.im.values()[0] * y.im.values()[0];
  }
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("propagate rejects non-unit beams") {
  Rng rng(4);
  const Channel ch = sample_channel(1, 4, 4, rng);
  Eigen::VectorXcd big = Eigen::VectorXcd::Ones(4);
  Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(4);
  e1[0] = 1.0;
  CHECK_THROWS_AS(
      propagate(ch, ad::make_complex(big), ad::make_complex(e1), 0.0, rng),
      ContractError);
}

TEST_CASE("global phase invariance of |w^H H f|") {
  Rng rng(6);
  const Channel ch = sample_channel(2, 8, 8, rng);
  const Eigen::VectorXcd w = unit_random(8, rng);
  const Eigen::VectorXcd f = unit_random(8, rng);
  const double base = std::abs(w.dot(ch.h * f));
  const std::complex<double> ph1 = std::polar(1.0, 1.234);
  const std::complex<double> ph2 = std::polar(1.0, -0.777);
  const double rotated =
      std::abs((ph1 * w).dot(ch.h * (ph2 * f)));
  CHECK(std::abs(base - rotated) < 1e-10);
}

TEST_CASE("rank-1 gain bound with equality at matched beams") {
  Rng rng(8);
  std::vector<PathParams> paths = {{{rng.normal(), rng.normal()}, -0.2, 1.0}};
  const Channel ch = assemble_channel(paths, 8, 16);
  const double bound = std::abs(paths[0].alpha) * std::sqrt(8.0 * 16.0);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXcd w = unit_random(8, rng);
    const Eigen::VectorXcd f = unit_random(16, rng);
    CHECK(std::abs(w.dot(ch.h * f)) <= bound + 1e-9);
  }
  const Eigen::VectorXcd wm =
      array_response(-0.2, 8).conjugate() / std::sqrt(8.0);
  const Eigen::VectorXcd fm =
      array_response(1.0, 16).conjugate() / std::sqrt(16.0);
  CHECK(std::abs(wm.dot(ch.h * fm)) == doctest::Approx(bound).epsilon(1e-10));
}

TEST_CASE("propagate is differentiable in w and f") {
  Rng rng(10);
  const Channel ch = sample_channel(2, 4, 6, rng);
  const ad::Tensor w_raw = ad::Tensor::leaf(
      {8}, (Eigen::ArrayXd(8) << 1, 0.2, -0.3, 0.4, 0, 0.1, -0.2, 0.5)
               .finished());
  const ad::Tensor f_raw = ad::Tensor::leaf(
      {12}, Eigen::ArrayXd::LinSpaced(12, 0.3, 1.4));
  auto make_unit = [](const ad::Tensor& raw, int n) {
    const ad::Tensor normed = ad::div(raw, ad::l2_norm(raw));
    return ad::ComplexTensor{ad::slice(normed, 0, n),
                             ad::slice(normed, n, n)};
  };
  auto f = [&](const ad::Tensor& t) {
    Rng inner(99);
    const auto y = propagate(ch, make_unit(t, 4), make_unit(f_raw, 6), 0.5,
                             inner);
    return ad::cabs2(y);
  };
  CHECK(ad::finite_diff_check(f, w_raw, 1e-6) < 1e-4);
}
