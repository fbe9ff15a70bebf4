#include "ba/training.hpp"

#include <chrono>
#include <cmath>

#include "ba/errors.hpp"

namespace ba::training {

using ad::ComplexTensor;
using ad::Tensor;

OptimizerState init_optimizer(
    const std::vector<std::pair<std::string, ad::Tensor>>& params) {
  OptimizerState opt;
  for (const auto& [name, t] : params) {
    opt.m1.push_back(Eigen::ArrayXd::Zero(t.size()));
    opt.m2.push_back(Eigen::ArrayXd::Zero(t.size()));
  }
  return opt;
}

void adam_update(std::vector<std::pair<std::string, ad::Tensor>>& params,
                 const std::vector<Eigen::ArrayXd>& grads,
                 OptimizerState& opt, double lr, double beta1, double beta2,
                 double eps) {
  if (params.size() != grads.size() || params.size() != opt.m1.size()) {
    throw ContractError("adam_update: parameter/gradient/state count mismatch");
  }
  ++opt.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(opt.step));
  for (size_t i = 0; i < params.size(); ++i) {
    auto& m1 = opt.m1[i];
    auto& m2 = opt.m2[i];
    const auto& g = grads[i];
    m1 = beta1 * m1 + (1.0 - beta1) * g;
    m2 = beta2 * m2 + (1.0 - beta2) * g.square();
    // Ascent: step along the gradient.
    params[i].second.values_mutable() +=
        lr * (m1 / c1) / ((m2 / c2).sqrt() + eps);
  }
}

double clip_gradients(std::vector<Eigen::ArrayXd>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.square().sum();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& g : grads) g *= s;
  }
  return norm;
}

ad::Tensor objective(const protocol::EpisodeTrace& trace,
                     const channel::Channel& h, bool squared_norm) {
  if (h.frob_norm <= 0.0) {
    throw DegenerateInputError("objective: zero channel norm");
  }
  const ComplexTensor hc = ad::make_complex(h.h);
  const ComplexTensor u = ad::complex_matvec(hc, trace.f_final);
  const ComplexTensor s = ad::cvdot(trace.w_final, u);
  const Tensor gain = ad::add(ad::square(s.re), ad::square(s.im));
  const double denom =
      squared_norm ? h.frob_norm * h.frob_norm : h.frob_norm;
  return ad::scale(gain, 1.0 / denom);
}

int optimal_bs_index(const channel::Channel& h,
                     const codebook::ConventionalCodebook& cb) {
  if (cb.m < 1) throw ContractError("optimal_bs_index: empty codebook");
  int best = 0;
  double best_gain = -1.0;
  for (int k = 0; k < cb.m; ++k) {
    const double gain = (h.h * cb.beam(k)).norm();
    if (gain > best_gain) {
      best_gain = gain;
      best = k;
    }
  }
  return best;
}

ad::Tensor c1_aux_loss(const ad::Tensor& logits, int label) {
  if (label < 0 || label >= logits.size()) {
    throw ContractError("c1_aux_loss: label " + std::to_string(label) +
                        " out of range");
  }
  const Tensor p = ad::softmax(logits);
  // sum collapses the length-1 slice to a scalar.
  return ad::neg(ad::log(ad::sum(ad::slice(p, label, 1))));
}

TrainStats train_step_generic(
    const std::function<EpisodeOutcome(const channel::Channel&, Rng&)>&
        episode_fn,
    std::vector<std::pair<std::string, ad::Tensor>>& params,
    OptimizerState& opt, const SystemConfig& cfg, long iteration,
    Rng& master) {
  const auto t0 = std::chrono::steady_clock::now();
  for (auto& [name, t] : params) t.clear_grad();

  const int batch = cfg.train.batch;
  double sum_obj = 0.0;
  double sum_gain = 0.0;
  for (int e = 0; e < batch; ++e) {
    const std::uint64_t idx =
        static_cast<std::uint64_t>(iteration) * batch + e;
    Rng ch_rng = master.derive("channel", idx);
    Rng ep_rng = master.derive("episode", idx);
    const channel::Channel h =
        channel::sample_channel(cfg.n_paths, cfg.n_rx, cfg.n_tx, ch_rng);
    const EpisodeOutcome out = episode_fn(h, ep_rng);

    const ComplexTensor hc = ad::make_complex(h.h);
    const ComplexTensor u = ad::complex_matvec(hc, out.f_final);
    const ComplexTensor s = ad::cvdot(out.w_final, u);
    const Tensor gain = ad::add(ad::square(s.re), ad::square(s.im));
    const double denom = cfg.objective_squared_norm
                             ? h.frob_norm * h.frob_norm
                             : h.frob_norm;
    Tensor obj = ad::scale(gain, 1.0 / denom);
    sum_gain += gain.item();
    sum_obj += obj.item();
    Tensor loss = obj;
    if (out.aux_loss.valid()) loss = ad::sub(loss, out.aux_loss);
    if (!std::isfinite(loss.item())) {
      throw NumericError("training diverged: non-finite loss at iteration " +
                         std::to_string(iteration));
    }
    ad::backward(ad::scale(loss, 1.0 / batch));
  }

  std::vector<Eigen::ArrayXd> grads;
  grads.reserve(params.size());
  for (auto& [name, t] : params) {
    grads.push_back(t.has_grad() ? t.grad()
                                 : Eigen::ArrayXd::Zero(t.size()).eval());
    if (!grads.back().allFinite()) {
      throw NumericError("training diverged: non-finite gradient in '" + name +
                         "' at iteration " + std::to_string(iteration));
    }
  }
  TrainStats stats;
  stats.iteration = iteration;
  stats.grad_norm = clip_gradients(grads, cfg.train.grad_clip);
  adam_update(params, grads, opt, cfg.train.learning_rate, cfg.train.beta1,
              cfg.train.beta2, cfg.train.epsilon);
  for (auto& [name, t] : params) t.clear_grad();

  stats.mean_objective = sum_obj / batch;
  stats.mean_gain_db = 10.0 * std::log10(std::max(sum_gain / batch, 1e-300));
  stats.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return stats;
}

TrainStats train_step(nn::ModelParams& p, OptimizerState& opt,
                      const SystemConfig& cfg, long iteration, Rng& master) {
  auto params = nn::trainable_params(p);
  const double sigma_n = std::pow(10.0, -cfg.train.snr_db / 20.0);
  auto episode_fn = [&](const channel::Channel& h,
                        Rng& rng) -> EpisodeOutcome {
    protocol::RunOptions opts;
    opts.sigma_n = sigma_n;
    const protocol::EpisodeTrace trace =
        protocol::run_episode(h, p, cfg, opts, rng);
    EpisodeOutcome out;
    out.w_final = trace.w_final;
    out.f_final = trace.f_final;
    if (p.variant == Variant::C1) {
      const int label = optimal_bs_index(h, p.conventional);
      out.aux_loss = c1_aux_loss(trace.feedback.logits, label);
    }
    return out;
  };
  return train_step_generic(episode_fn, params, opt, cfg, iteration, master);
}

void train(nn::ModelParams& p, OptimizerState& opt, const SystemConfig& cfg,
           long start_iteration,
           const std::function<void(const TrainStats&)>& sink) {
  Rng master(cfg.master_seed);
  for (long it = start_iteration; it < cfg.train.iterations; ++it) {
    const TrainStats stats = train_step(p, opt, cfg, it, master);
    if (sink) sink(stats);
  }
}

}  // namespace ba::training
