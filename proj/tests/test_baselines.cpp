#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/SVD>
#include <cmath>
#include <complex>

#include "ba/baselines.hpp"
#include "ba/errors.hpp"

using namespace ba;
using namespace ba::baselines;

namespace {

Eigen::VectorXcd to_vec(const ad::ComplexTensor& v) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = {v.re.values()[i], v.im.values()[i]};
  }
  return out;
}

Eigen::VectorXcd unit_random(int n, Rng& rng) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = {rng.normal(), rng.normal()};
  return v / v.norm();
}

codebook::ConventionalCodebook custom_cb(const std::vector<Eigen::VectorXcd>& beams) {
  codebook::ConventionalCodebook cb;
  cb.m = static_cast<int>(beams.size());
  cb.n = static_cast<int>(beams[0].size());
  cb.beams.resize(cb.n, cb.m);
  for (int k = 0; k < cb.m; ++k) cb.beams.col(k) = beams[k];
  return cb;
}

double sigma_max(const channel::Channel& h) {
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(h.h).singularValues()[0];
}

}  // namespace

TEST_CASE("exhaustive_split rules") {
  CHECK(exhaustive_split(8, 4) == std::pair{4, 2});
  CHECK(exhaustive_split(16, 8) == std::pair{8, 2});
  CHECK(exhaustive_split(8, 8) == std::pair{8, 1});
  // 12 is not divisible by 8: most balanced split with M_TX >= M_RX.
  CHECK(exhaustive_split(12, 8) == std::pair{4, 3});
  CHECK(exhaustive_split(7, 4) == std::pair{7, 1});
  CHECK_THROWS_AS(exhaustive_split(0, 4), ContractError);
}

TEST_CASE("exhaustive_search finds the matched pair noiselessly") {
  const double phi_rx = 0.37, phi_tx = -0.82;
  std::vector<channel::PathParams> paths = {{{1.0, 0.5}, phi_rx, phi_tx}};
  const auto h = channel::assemble_channel(paths, 8, 16);

  Rng rng(3);
  const Eigen::VectorXcd f_match =
      channel::array_response(phi_tx, 16).conjugate() / 4.0;
  const Eigen::VectorXcd w_match =
      channel::array_response(phi_rx, 8).conjugate() / std::sqrt(8.0);
  const auto cb_tx = custom_cb(
      {unit_random(16, rng), f_match, unit_random(16, rng), unit_random(16, rng)});
  const auto cb_rx = custom_cb({unit_random(8, rng), w_match});

  const auto res = exhaustive_search(h, cb_tx, cb_rx, 0.0, rng);
  CHECK(res.tx_index == 1);
  CHECK(res.rx_index == 1);
  CHECK(res.measured.size() == 8);  // M_TX=4 times M_RX=2
}

TEST_CASE("noiseless exhaustive search equals the brute-force oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto h = channel::sample_channel(2, 8, 16, rng);
    const auto cb_tx = codebook::conventional_codebook(4, 16);
    const auto cb_rx = codebook::conventional_codebook(2, 8);
    const auto res = exhaustive_search(h, cb_tx, cb_rx, 0.0, rng);

    // Index ties are real here: mirror sectors share one beam exactly, so
    // the oracle compares achieved gains, not argmax positions.
    double best = -1.0;
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 2; ++k) {
        best = std::max(best,
                        std::norm(cb_rx.beam(k).dot(h.h * cb_tx.beam(j))));
      }
    }
    const double achieved = std::norm(res.w.dot(h.h * res.f));
    CHECK(achieved == doctest::Approx(best).epsilon(1e-9));
    CHECK(std::norm(res.w.dot(h.h * res.f)) <=
          sigma_max(h) * sigma_max(h) + 1e-9);
  }
}

TEST_CASE("enlarging both codebooks never hurts noiseless search") {
  Rng rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    const auto h = channel::sample_channel(2, 8, 16, rng);
    std::vector<Eigen::VectorXcd> tx, rx;
    for (int i = 0; i < 3; ++i) tx.push_back(unit_random(16, rng));
    for (int i = 0; i < 2; ++i) rx.push_back(unit_random(8, rng));
    const auto small = exhaustive_search(h, custom_cb(tx), custom_cb(rx), 0.0, rng);
    tx.push_back(unit_random(16, rng));
    rx.push_back(unit_random(8, rng));
    const auto big = exhaustive_search(h, custom_cb(tx), custom_cb(rx), 0.0, rng);
    const double g_small = std::norm(small.w.dot(h.h * small.f));
    const double g_big = std::norm(big.w.dot(h.h * big.f));
    CHECK(g_big >= g_small - 1e-12);
  }
}

TEST_CASE("mrt_mrc reaches the top singular pair") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto h = channel::sample_channel(3, 8, 16, rng);
    const auto [f, w] = mrt_mrc(h);
    CHECK(std::abs(f.norm() - 1.0) < 1e-10);
    CHECK(std::abs(w.norm() - 1.0) < 1e-10);
    const double gain = std::norm(w.dot(h.h * f));
    const double smax = sigma_max(h);
    CHECK(std::abs(gain - smax * smax) < 1e-9 * std::max(1.0, smax * smax));
  }
}

TEST_CASE("mrt_mrc closed-form fixtures") {
  // Rank-1 channel: gain |alpha|^2 N_RX N_TX.
  std::vector<channel::PathParams> paths = {{{0.6, -0.8}, 0.2, 1.1}};
  const auto h = channel::assemble_channel(paths, 8, 16);
  const auto [f, w] = mrt_mrc(h);
  CHECK(std::norm(w.dot(h.h * f)) ==
        doctest::Approx(1.0 * 8 * 16).epsilon(1e-9));

  // Diagonal square channel with entries (3, 1, 1).
  channel::Channel d;
  d.h = Eigen::MatrixXcd::Zero(3, 3);
  d.h(0, 0) = 3.0;
  d.h(1, 1) = 1.0;
  d.h(2, 2) = 1.0;
  d.frob_norm = d.h.norm();
  const auto [fd, wd] = mrt_mrc(d);
  CHECK(std::norm(wd.dot(d.h * fd)) == doctest::Approx(9.0).epsilon(1e-9));
  CHECK(std::abs(fd[0]) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(wd[0]) == doctest::Approx(1.0).epsilon(1e-9));

  channel::Channel z;
  z.h = Eigen::MatrixXcd::Zero(4, 4);
  z.frob_norm = 0.0;
  CHECK_THROWS_AS(mrt_mrc(z), DegenerateInputError);
}

TEST_CASE("mrt_mrc dominates random beam pairs") {
  Rng rng(13);
  const auto h = channel::sample_channel(3, 8, 16, rng);
  const auto [f, w] = mrt_mrc(h);
  const double gain = std::norm(w.dot(h.h * f));
  for (int i = 0; i < 1000; ++i) {
    const double g =
        std::norm(unit_random(8, rng).dot(h.h * unit_random(16, rng)));
    CHECK(g <= gain + 1e-9);
  }
}

TEST_CASE("dnn_noa probing is non-adaptive and unit-norm") {
  SystemConfig cfg = desk_profile();
  Rng rng(17);
  const DnnNoaParams p = init_dnn_noa(cfg, rng);

  // Both final-beam networks consume the 2T fed-back reals.
  CHECK(p.ue_net[0].w.shape()[1] == 2 * cfg.t_steps);
  CHECK(p.bs_net[0].w.shape()[1] == 2 * cfg.t_steps);

  Rng ch_rng(18);
  const auto h1 = channel::sample_channel(cfg.n_paths, cfg.n_rx, cfg.n_tx, ch_rng);
  const auto h2 = channel::sample_channel(cfg.n_paths, cfg.n_rx, cfg.n_tx, ch_rng);
  Rng e1(1), e2(1);
  const auto t1 = run_dnn_noa_episode(h1, p, cfg, 0.1, e1);
  const auto t2 = run_dnn_noa_episode(h2, p, cfg, 0.1, e2);
  REQUIRE(static_cast<int>(t1.probes_tx.size()) == cfg.t_steps);
  for (int t = 0; t < cfg.t_steps; ++t) {
    CHECK((to_vec(t1.probes_tx[t]) - to_vec(t2.probes_tx[t])).norm() == 0.0);
    CHECK((to_vec(t1.probes_rx[t]) - to_vec(t2.probes_rx[t])).norm() == 0.0);
    CHECK(std::abs(to_vec(t1.probes_tx[t]).norm() - 1.0) < 1e-10);
    CHECK(std::abs(to_vec(t1.probes_rx[t]).norm() - 1.0) < 1e-10);
  }
  CHECK(std::abs(to_vec(t1.w_final).norm() - 1.0) < 1e-10);
  CHECK(std::abs(to_vec(t1.f_final).norm() - 1.0) < 1e-10);
}

TEST_CASE("dnn_noa gradients reach every parameter") {
  SystemConfig cfg = desk_profile();
  Rng rng(19);
  DnnNoaParams p = init_dnn_noa(cfg, rng);
  Rng ch_rng(20), ep(21);
  const auto h = channel::sample_channel(cfg.n_paths, cfg.n_rx, cfg.n_tx, ch_rng);
  const auto trace = run_dnn_noa_episode(h, p, cfg, 0.2, ep);

  const auto hc = ad::make_complex(h.h);
  const auto s = ad::cvdot(trace.w_final, ad::complex_matvec(hc, trace.f_final));
  ad::backward(ad::add(ad::square(s.re), ad::square(s.im)));
  for (auto& [name, t] : trainable_params(p)) {
    INFO(name);
    CHECK(t.has_grad());
    CHECK(t.grad().abs().maxCoeff() > 0.0);
  }
}

TEST_CASE("rnn_a alternates sides over T channel uses") {
  SystemConfig cfg = desk_profile();
  REQUIRE(cfg.t_steps == 8);
  Rng rng(23);
  const RnnAParams p = init_rnn_a(cfg, rng);
  Rng ch_rng(24), ep(25);
  const auto h = channel::sample_channel(cfg.n_paths, cfg.n_rx, cfg.n_tx, ch_rng);
  const auto trace = run_rnn_a_episode(h, p, cfg, 0.1, ep);

  REQUIRE(static_cast<int>(trace.probes_tx.size()) == 8);
  int bs_tx = 0, ue_tx = 0;
  for (int t = 0; t < 8; ++t) {
    // Even steps: BS transmits over n_tx antennas; odd: UE over n_rx.
    if (t % 2 == 0) {
      CHECK(trace.probes_tx[t].size() == cfg.n_tx);
      ++bs_tx;
    } else {
      CHECK(trace.probes_tx[t].size() == cfg.n_rx);
      ++ue_tx;
    }
    CHECK(std::abs(to_vec(trace.probes_tx[t]).norm() - 1.0) < 1e-10);
    CHECK(std::abs(to_vec(trace.probes_rx[t]).norm() - 1.0) < 1e-10);
  }
  CHECK(bs_tx == 4);
  CHECK(ue_tx == 4);
  CHECK(trace.w_final.size() == cfg.n_rx);
  CHECK(trace.f_final.size() == cfg.n_tx);
}

TEST_CASE("rnn_a gradients reach both controllers") {
  SystemConfig cfg = desk_profile();
  Rng rng(29);
  RnnAParams p = init_rnn_a(cfg, rng);
  Rng ch_rng(30), ep(31);
  const auto h = channel::sample_channel(cfg.n_paths, cfg.n_rx, cfg.n_tx, ch_rng);
  const auto trace = run_rnn_a_episode(h, p, cfg, 0.2, ep);

  const auto hc = ad::make_complex(h.h);
  const auto s = ad::cvdot(trace.w_final, ad::complex_matvec(hc, trace.f_final));
  ad::backward(ad::add(ad::square(s.re), ad::square(s.im)));
  for (auto& [name, t] : trainable_params(p)) {
    INFO(name);
    CHECK(t.has_grad());
    CHECK(t.grad().abs().maxCoeff() > 0.0);
  }
}

TEST_CASE("baseline parameter budgets are honored") {
  const SystemConfig cfg = desk_profile();
  Rng r1(2), r2(2);
  DnnNoaParams noa = init_dnn_noa(cfg, r1);
  RnnAParams rnn = init_rnn_a(cfg, r2);
  long n_noa = 0, n_rnn = 0;
  for (auto& [name, t] : trainable_params(noa)) n_noa += t.size();
  for (auto& [name, t] : trainable_params(rnn)) n_rnn += t.size();
  CHECK(n_noa >= 45000);
  CHECK(n_noa <= 55000);
  CHECK(n_rnn >= 45000);
  CHECK(n_rnn <= 55000);
}
