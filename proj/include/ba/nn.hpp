#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ba/autodiff.hpp"
#include "ba/codebook.hpp"
#include "ba/config.hpp"
#include "ba/rng.hpp"

namespace ba::nn {

struct GruLayerParams {
  ad::Tensor wz, uz, bz;  // update gate
  ad::Tensor wr, ur, br;  // reset gate
  ad::Tensor wh, uh, bh;  // candidate state
  int input_size = 0;
  int hidden_size = 0;
};

enum class Activation { Tanh, Relu, Linear };

struct DenseParams {
  ad::Tensor w;  // out x in
  ad::Tensor b;  // out
  Activation act = Activation::Linear;
};

// Trainable BS codebook stored as a 2*n_tx x n_cb real matrix; each column
// materializes to a unit-norm complex beam.
struct LearnableCodebook {
  ad::Tensor raw;
  int n_tx = 0;
  int n_cb = 0;
  bool trainable = false;
};

// All parameter groups of the proposed scheme. Which groups are trainable
// depends on the variant: C1 trains only the UE side, C2 adds the BS
// final-beam network, C3 additionally trains the codebook.
struct ModelParams {
  Variant variant = Variant::C3;
  int n_rx = 0, n_tx = 0, n_cb = 0, n_fb = 0;
  int gru_hidden = 0;
  std::vector<GruLayerParams> gru;  // two layers
  DenseParams beam_head;            // hidden -> 2*n_rx
  DenseParams feedback_head;        // hidden -> n_fb (C2/C3) or n_cb (C1)
  std::vector<DenseParams> bs_net;  // C2/C3 only
  LearnableCodebook codebook;
  codebook::ConventionalCodebook conventional;
};

// One GRU recurrence: z/r gates, candidate, convex state update.
ad::Tensor gru_step(const ad::Tensor& x, const ad::Tensor& h,
                    const GruLayerParams& p);

ad::Tensor dense_forward(const ad::Tensor& x, const DenseParams& p);

// First half of raw is the real part, second half imaginary; normalized to a
// unit-norm complex beam.
ad::ComplexTensor unit_norm_beam(const ad::Tensor& raw);

ad::ComplexTensor codebook_row(const LearnableCodebook& cb, int k);

// Width of the GRU layers solved so the variant's trainable count lands
// within 10% of cfg.param_budget.
int solve_gru_width(const SystemConfig& cfg);

ModelParams init_params(const SystemConfig& cfg, Rng& rng);

long count_params(const ModelParams& p);

// Trainable leaves of the variant, with stable names for checkpoints.
std::vector<std::pair<std::string, ad::Tensor>> trainable_params(
    ModelParams& p);

void clear_grads(ModelParams& p);

// Random init helpers: weights and dense biases uniform +-1/sqrt(fan_in),
// GRU biases zero.
DenseParams init_dense(int out, int in, Activation act, Rng& rng);
GruLayerParams init_gru_layer(int input, int hidden, Rng& rng);

}  // namespace ba::nn
