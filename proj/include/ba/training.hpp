#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ba/autodiff.hpp"
#include "ba/baselines.hpp"
#include "ba/channel.hpp"
#include "ba/config.hpp"
#include "ba/nn.hpp"
#include "ba/protocol.hpp"
#include "ba/rng.hpp"

namespace ba::training {

// First/second moment accumulators for the adaptive-moment ascent step.
struct OptimizerState {
  std::vector<Eigen::ArrayXd> m1;
  std::vector<Eigen::ArrayXd> m2;
  long step = 0;
};

OptimizerState init_optimizer(
    const std::vector<std::pair<std::string, ad::Tensor>>& params);

// One bias-corrected adaptive-moment update, sign set for ascent.
void adam_update(std::vector<std::pair<std::string, ad::Tensor>>& params,
                 const std::vector<Eigen::ArrayXd>& grads,
                 OptimizerState& opt, double lr, double beta1, double beta2,
                 double eps);

// Final-timestep beamforming gain normalized by the channel Frobenius norm:
// |w_T^H H f_T|^2 / ||H||_F  (first power by default).
ad::Tensor objective(const protocol::EpisodeTrace& trace,
                     const channel::Channel& h, bool squared_norm = false);

// Best conventional-codebook index for a channel: argmax_k ||H f_k||_2.
int optimal_bs_index(const channel::Channel& h,
                     const codebook::ConventionalCodebook& cb);

// Cross-entropy -log softmax(logits)[label], used as the C1 auxiliary loss.
ad::Tensor c1_aux_loss(const ad::Tensor& logits, int label);

struct TrainStats {
  long iteration = 0;
  double mean_objective = 0.0;
  double mean_gain_db = 0.0;
  double grad_norm = 0.0;
  double elapsed_s = 0.0;
};

// One batched training iteration for the proposed scheme.
TrainStats train_step(nn::ModelParams& p, OptimizerState& opt,
                      const SystemConfig& cfg, long iteration, Rng& master);

// Full training run; invokes sink with one stats record per iteration.
void train(nn::ModelParams& p, OptimizerState& opt, const SystemConfig& cfg,
           long start_iteration,
           const std::function<void(const TrainStats&)>& sink);

// Generic batched ascent step used for the learned baselines. episode_fn
// must build a differentiable (w_final, f_final) pair for a channel.
struct EpisodeOutcome {
  ad::ComplexTensor w_final;
  ad::ComplexTensor f_final;
  ad::Tensor aux_loss;  // optional, subtracted from the objective
};

TrainStats train_step_generic(
    const std::function<EpisodeOutcome(const channel::Channel&, Rng&)>&
        episode_fn,
    std::vector<std::pair<std::string, ad::Tensor>>& params,
    OptimizerState& opt, const SystemConfig& cfg, long iteration,
    Rng& master);

// Global-norm gradient clipping; returns the pre-clip norm.
double clip_gradients(std::vector<Eigen::ArrayXd>& grads, double max_norm);

}  // namespace ba::training
