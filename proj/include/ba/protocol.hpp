#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "ba/autodiff.hpp"
#include "ba/channel.hpp"
#include "ba/config.hpp"
#include "ba/nn.hpp"
#include "ba/rng.hpp"

namespace ba::protocol {

// Recurrent state of the UE controller. t counts controller advances; the
// state that has performed k advances has absorbed measurements y_0..y_{k-2}.
struct UEState {
  std::vector<ad::Tensor> hidden;
  ad::ComplexTensor w_prev;  // last emitted beam (zeros before the first)
  ad::ComplexTensor y_prev;  // last observed symbol (zero before the first)
  int x_prev = -1;           // last observed BS beam index, -1 before t=0
  int t = 0;
};

struct FeedbackMessage {
  Variant variant = Variant::C3;
  ad::Tensor vec;     // C2/C3: real vector of length n_fb
  ad::Tensor logits;  // C1: n_cb logits (kept for the cross-entropy loss)
  int index = -1;     // C1: argmax beam index
};

struct StepRecord {
  int t = 0;
  int x = 0;  // swept BS beam index
  ad::ComplexTensor f;
  ad::ComplexTensor w;
  ad::ComplexTensor y;
};

struct EpisodeTrace {
  int start_index = 0;
  std::vector<StepRecord> steps;  // exactly T sensing records
  FeedbackMessage feedback;
  ad::ComplexTensor w_final;
  ad::ComplexTensor f_final;
};

struct RunOptions {
  double sigma_n = 0.0;
  std::optional<int> forced_start;  // overrides cfg.fixed_start/random draw
  // Test hook: replaces the observed symbol at step t (applied as a constant
  // offset so differentiability of the nominal path is preserved).
  std::function<std::complex<double>(int, std::complex<double>)> y_override;
};

UEState initial_ue_state(const nn::ModelParams& p);

// Sweep beam for timestep t with start index i: x = (t+i) mod N_CB. C3 reads
// the learnable codebook, C1/C2 the conventional one.
std::pair<ad::ComplexTensor, int> bs_sweep_beam(const nn::ModelParams& p,
                                                int t, int i);

// One controller advance: encode (y_prev, x_prev, w_prev), update both GRU
// layers, emit the unit-norm combining beam.
std::pair<UEState, ad::ComplexTensor> ue_controller_step(
    const UEState& s, const nn::ModelParams& p, double sigma_n);

// Record an observation into the state (consumed at the next advance).
void observe(UEState& s, const ad::ComplexTensor& y, int x);

// Feedback message from the current state. Requires all T sensing steps.
FeedbackMessage ue_feedback(const UEState& s, const nn::ModelParams& p,
                            const SystemConfig& cfg);

ad::ComplexTensor bs_final_beam(const FeedbackMessage& m,
                                const nn::ModelParams& p);

// Final combining beam w_T: one further controller advance.
std::pair<UEState, ad::ComplexTensor> ue_final_beam(const UEState& s,
                                                    const nn::ModelParams& p,
                                                    const SystemConfig& cfg,
                                                    double sigma_n);

EpisodeTrace run_episode(const channel::Channel& h, const nn::ModelParams& p,
                         const SystemConfig& cfg, const RunOptions& opts,
                         Rng& rng);

}  // namespace ba::protocol
