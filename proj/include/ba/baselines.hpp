#pragma once

#include <utility>
#include <vector>

#include "ba/autodiff.hpp"
#include "ba/channel.hpp"
#include "ba/codebook.hpp"
#include "ba/config.hpp"
#include "ba/nn.hpp"
#include "ba/rng.hpp"

namespace ba::baselines {

struct PairMeasurement {
  int tx_index = 0;
  int rx_index = 0;
  std::complex<double> y;
};

struct ExhaustiveResult {
  Eigen::VectorXcd f;
  Eigen::VectorXcd w;
  int tx_index = 0;
  int rx_index = 0;
  std::vector<PairMeasurement> measured;
};

// Measure every (f_j, w_k) pair once and keep the pair with the largest
// received power.
ExhaustiveResult exhaustive_search(const channel::Channel& h,
                                   const codebook::ConventionalCodebook& cb_tx,
                                   const codebook::ConventionalCodebook& cb_rx,
                                   double sigma_n, Rng& rng);

// Split a pair budget T into (M_TX, M_RX): M_TX = n_cb when it divides T,
// otherwise the most balanced factorization with M_TX >= M_RX.
std::pair<int, int> exhaustive_split(int t_budget, int n_cb);

// SVD-optimal beam pair via power iteration on H^H H.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> mrt_mrc(
    const channel::Channel& h);

// --- Learned baseline: joint non-adaptive probing with feedback ------------

struct DnnNoaParams {
  int t_steps = 0;
  ad::Tensor probe_tx_raw;  // 2*n_tx x T
  ad::Tensor probe_rx_raw;  // 2*n_rx x T
  std::vector<nn::DenseParams> ue_net;  // 2T -> ... -> 2*n_rx
  std::vector<nn::DenseParams> bs_net;  // 2T -> ... -> 2*n_tx
};

struct BaselineTrace {
  ad::ComplexTensor w_final;
  ad::ComplexTensor f_final;
  std::vector<ad::ComplexTensor> probes_tx;
  std::vector<ad::ComplexTensor> probes_rx;
};

DnnNoaParams init_dnn_noa(const SystemConfig& cfg, Rng& rng);
std::vector<std::pair<std::string, ad::Tensor>> trainable_params(
    DnnNoaParams& p);
BaselineTrace run_dnn_noa_episode(const channel::Channel& h,
                                  const DnnNoaParams& p,
                                  const SystemConfig& cfg, double sigma_n,
                                  Rng& rng);

// --- Learned baseline: adaptive codebook-free ping-pong --------------------

struct RnnAParams {
  int t_steps = 0;
  // One controller per side, each a two-layer GRU with a beam head.
  std::vector<nn::GruLayerParams> bs_gru;
  nn::DenseParams bs_head;
  std::vector<nn::GruLayerParams> ue_gru;
  nn::DenseParams ue_head;
  int bs_hidden = 0, ue_hidden = 0;
};

RnnAParams init_rnn_a(const SystemConfig& cfg, Rng& rng);
std::vector<std::pair<std::string, ad::Tensor>> trainable_params(
    RnnAParams& p);
BaselineTrace run_rnn_a_episode(const channel::Channel& h, const RnnAParams& p,
                                const SystemConfig& cfg, double sigma_n,
                                Rng& rng);

}  // namespace ba::baselines
