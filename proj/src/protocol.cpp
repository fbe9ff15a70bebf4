#include "ba/protocol.hpp"

#include <cmath>

#include "ba/errors.hpp"

namespace ba::protocol {

using ad::ComplexTensor;
using ad::Tensor;

UEState initial_ue_state(const nn::ModelParams& p) {
  UEState s;
  for (const auto& layer : p.gru) {
    s.hidden.push_back(Tensor::zeros({layer.hidden_size}));
  }
  s.w_prev = ad::complex_zeros({p.n_rx});
  s.y_prev = ad::complex_zeros({});
  s.x_prev = -1;
  s.t = 0;
  return s;
}

std::pair<ad::ComplexTensor, int> bs_sweep_beam(const nn::ModelParams& p,
                                                int t, int i) {
  if (t < 0 || i < 0 || i >= p.n_cb) {
    throw ContractError("bs_sweep_beam: invalid timestep " +
                        std::to_string(t) + " or start index " +
                        std::to_string(i));
  }
  const int x = (t + i) % p.n_cb;
  if (p.variant == Variant::C3) {
    return {nn::codebook_row(p.codebook, x), x};
  }
  return {ad::make_complex(Eigen::VectorXcd(p.conventional.beam(x))), x};
}

std::pair<UEState, ad::ComplexTensor> ue_controller_step(
    const UEState& s, const nn::ModelParams& p, double sigma_n) {
  // Input encoding: scaled (Re y, Im y), one-hot of x_prev, Re/Im of w_prev.
  const double y_scale = 1.0 / std::sqrt(1.0 + sigma_n * sigma_n);
  Eigen::ArrayXd onehot = Eigen::ArrayXd::Zero(p.n_cb);
  if (s.x_prev >= 0) onehot[s.x_prev % p.n_cb] = 1.0;
  const Tensor y_enc =
      ad::scale(ad::concat({s.y_prev.re, s.y_prev.im}), y_scale);
  const Tensor x_enc = Tensor::leaf({p.n_cb}, std::move(onehot));
  const Tensor input =
      ad::concat({y_enc, x_enc, s.w_prev.re, s.w_prev.im});

  UEState next = s;
  Tensor layer_in = input;
  for (size_t l = 0; l < p.gru.size(); ++l) {
    next.hidden[l] = nn::gru_step(layer_in, s.hidden[l], p.gru[l]);
    layer_in = next.hidden[l];
  }
  const Tensor raw = nn::dense_forward(next.hidden.back(), p.beam_head);
  const ComplexTensor w = nn::unit_norm_beam(raw);
  next.w_prev = w;
  next.t = s.t + 1;
  return {std::move(next), w};
}

void observe(UEState& s, const ad::ComplexTensor& y, int x) {
  s.y_prev = y;
  s.x_prev = x;
}

FeedbackMessage ue_feedback(const UEState& s, const nn::ModelParams& p,
                            const SystemConfig& cfg) {
  if (s.t < cfg.t_steps) {
    throw ContractError(
        "ue_feedback: called after " + std::to_string(s.t) + " of " +
        std::to_string(cfg.t_steps) + " sensing steps");
  }
  FeedbackMessage m;
  m.variant = p.variant;
  const Tensor out = nn::dense_forward(s.hidden.back(), p.feedback_head);
  if (p.variant == Variant::C1) {
    m.logits = out;
    Eigen::Index best = 0;
    out.values().maxCoeff(&best);
    m.index = static_cast<int>(best);
  } else {
    m.vec = out;
  }
  return m;
}

ad::ComplexTensor bs_final_beam(const FeedbackMessage& m,
                                const nn::ModelParams& p) {
  if (m.variant != p.variant) {
    throw ContractError("bs_final_beam: feedback variant " +
                        variant_name(m.variant) + " does not match model " +
                        variant_name(p.variant));
  }
  if (p.variant == Variant::C1) {
    // Conventional codebook row, no network; the argmax severs the gradient.
    return ad::make_complex(Eigen::VectorXcd(p.conventional.beam(m.index)));
  }
  Tensor x = m.vec;
  for (const auto& layer : p.bs_net) x = nn::dense_forward(x, layer);
  return nn::unit_norm_beam(x);
}

std::pair<UEState, ad::ComplexTensor> ue_final_beam(const UEState& s,
                                                    const nn::ModelParams& p,
                                                    const SystemConfig& cfg,
                                                    double sigma_n) {
  if (s.t < cfg.t_steps) {
    throw ContractError(
        "ue_final_beam: called after " + std::to_string(s.t) + " of " +
        std::to_string(cfg.t_steps) + " sensing steps");
  }
  return ue_controller_step(s, p, sigma_n);
}

EpisodeTrace run_episode(const channel::Channel& h, const nn::ModelParams& p,
                         const SystemConfig& cfg, const RunOptions& opts,
                         Rng& rng) {
  EpisodeTrace trace;
  if (opts.forced_start) {
    trace.start_index = *opts.forced_start;
  } else if (cfg.fixed_start) {
    trace.start_index = 0;
  } else {
    trace.start_index = static_cast<int>(rng.uniform_index(cfg.n_cb));
  }

  UEState s = initial_ue_state(p);
  UEState pre_final_state;  // state after the last sensing advance
  for (int t = 0; t < cfg.t_steps; ++t) {
    auto [f, x] = bs_sweep_beam(p, t, trace.start_index);
    auto [next, w] = ue_controller_step(s, p, opts.sigma_n);
    s = std::move(next);
    ComplexTensor y = channel::propagate(h, w, f, opts.sigma_n, rng);
    if (opts.y_override) {
      const std::complex<double> y_val{y.re.values()[0], y.im.values()[0]};
      const std::complex<double> delta = opts.y_override(t, y_val) - y_val;
      y = ad::cadd(y, ad::ComplexTensor{ad::Tensor::scalar(delta.real()),
                                        ad::Tensor::scalar(delta.imag())});
    }
    observe(s, y, x);
    trace.steps.push_back({t, x, f, w, y});
  }
  pre_final_state = s;

  auto [final_state, w_final] = ue_final_beam(s, p, cfg, opts.sigma_n);
  trace.w_final = w_final;
  // Default: the feedback sees all T measurements (the unrolled depiction).
  // The literal-equation alternative conditions on y_{<T-1} only.
  const UEState& fb_state =
      cfg.feedback_all_measurements ? final_state : pre_final_state;
  trace.feedback = ue_feedback(fb_state, p, cfg);
  trace.f_final = bs_final_beam(trace.feedback, p);
  return trace;
}

}  // namespace ba::protocol
