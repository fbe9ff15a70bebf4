#include "ba/nn.hpp"

#include <cmath>

#include "ba/errors.hpp"

namespace ba::nn {

using ad::Tensor;

ad::Tensor gru_step(const ad::Tensor& x, const ad::Tensor& h,
                    const GruLayerParams& p) {
  if (x.size() != p.input_size || h.size() != p.hidden_size) {
    throw DimensionError(
        "gru_step: input/hidden sizes (" + std::to_string(x.size()) + "," +
        std::to_string(h.size()) + ") do not match layer (" +
        std::to_string(p.input_size) + "," + std::to_string(p.hidden_size) +
        ")");
  }
  const Tensor z =
      ad::sigmoid(ad::add(ad::add(ad::matmul(p.wz, x), ad::matmul(p.uz, h)),
                          p.bz));
  const Tensor r =
      ad::sigmoid(ad::add(ad::add(ad::matmul(p.wr, x), ad::matmul(p.ur, h)),
                          p.br));
  const Tensor cand = ad::tanh(ad::add(
      ad::add(ad::matmul(p.wh, x), ad::matmul(p.uh, ad::mul(r, h))), p.bh));
  const Tensor keep = ad::sub(Tensor::ones({p.hidden_size}), z);
  return ad::add(ad::mul(keep, h), ad::mul(z, cand));
}

ad::Tensor dense_forward(const ad::Tensor& x, const DenseParams& p) {
  const Tensor pre = ad::add(ad::matmul(p.w, x), p.b);
  switch (p.act) {
    case Activation::Tanh: return ad::tanh(pre);
    case Activation::Relu: return ad::relu(pre);
    case Activation::Linear: return pre;
  }
  return pre;
}

ad::ComplexTensor unit_norm_beam(const ad::Tensor& raw) {
  if (raw.rank() != 1 || raw.size() % 2 != 0) {
    throw DimensionError("unit_norm_beam: raw must be a vector of length 2N");
  }
  const double nrm = std::sqrt(raw.values().square().sum());
  if (nrm <= 1e-12) {
    throw DegenerateInputError("unit_norm_beam: near-zero input vector");
  }
  const Eigen::Index n = raw.size() / 2;
  const Tensor normed = ad::div(raw, ad::l2_norm(raw));
  return {ad::slice(normed, 0, n), ad::slice(normed, n, n)};
}

ad::ComplexTensor codebook_row(const LearnableCodebook& cb, int k) {
  if (k < 0 || k >= cb.n_cb) {
    throw ContractError("codebook_row: index " + std::to_string(k) +
                        " out of range [0," + std::to_string(cb.n_cb) + ")");
  }
  // Differentiable column extraction via a constant selector vector.
  Eigen::ArrayXd sel = Eigen::ArrayXd::Zero(cb.n_cb);
  sel[k] = 1.0;
  const Tensor selector = Tensor::leaf({cb.n_cb}, std::move(sel));
  const Tensor raw_col = ad::matmul(cb.raw, selector);
  return unit_norm_beam(raw_col);
}

namespace {

long dense_count(int out, int in) { return static_cast<long>(out) * in + out; }

long gru_count(int input, int hidden) {
  return 3L * (static_cast<long>(hidden) * input +
               static_cast<long>(hidden) * hidden + hidden);
}

long count_for_width(const SystemConfig& cfg, int g) {
  const int in_dim = 2 + cfg.n_cb + 2 * cfg.n_rx;
  const int fb_out = cfg.variant == Variant::C1 ? cfg.n_cb : cfg.n_fb;
  long total = gru_count(in_dim, g) + gru_count(g, g) +
               dense_count(2 * cfg.n_rx, g) + dense_count(fb_out, g);
  if (cfg.variant != Variant::C1) {
    const int h2 = 2 * cfg.n_tx;
    total += dense_count(h2, cfg.n_fb) + dense_count(h2, h2) +
             dense_count(2 * cfg.n_tx, h2);
  }
  if (cfg.variant == Variant::C3) {
    total += 2L * cfg.n_tx * cfg.n_cb;
  }
  return total;
}

ad::Tensor uniform_leaf(ad::Shape shape, double bound, Rng& rng) {
  Eigen::Index n = 1;
  for (const auto d : shape) n *= d;
  Eigen::ArrayXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-bound, bound);
  return Tensor::leaf(std::move(shape), std::move(v));
}

}  // namespace

DenseParams init_dense(int out, int in, Activation act, Rng& rng) {
  DenseParams p;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  p.w = uniform_leaf({out, in}, bound, rng);
  // Biases share the weight init. A zero bias would make the beam head emit
  // the zero vector at t=0 (all-zero controller input leaves the state at
  // zero), which has no direction to normalize.
  p.b = uniform_leaf({out}, bound, rng);
  p.act = act;
  return p;
}

GruLayerParams init_gru_layer(int input, int hidden, Rng& rng) {
  GruLayerParams p;
  p.input_size = input;
  p.hidden_size = hidden;
  const double bi = 1.0 / std::sqrt(static_cast<double>(input));
  const double bh = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.wz = uniform_leaf({hidden, input}, bi, rng);
  p.uz = uniform_leaf({hidden, hidden}, bh, rng);
  p.bz = Tensor::zeros({hidden});
  p.wr = uniform_leaf({hidden, input}, bi, rng);
  p.ur = uniform_leaf({hidden, hidden}, bh, rng);
  p.br = Tensor::zeros({hidden});
  p.wh = uniform_leaf({hidden, input}, bi, rng);
  p.uh = uniform_leaf({hidden, hidden}, bh, rng);
  p.bh = Tensor::zeros({hidden});
  return p;
}

int solve_gru_width(const SystemConfig& cfg) {
  // Width is solved against a fixed reference architecture (the C2 layout)
  // so all variants share the same controller and the variant comparison is
  // architecture-matched; only the set of trainable groups differs.
  SystemConfig ref = cfg;
  ref.variant = Variant::C2;
  int lo = 1, hi = 8192;
  while (count_for_width(ref, hi) < cfg.param_budget) hi *= 2;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (count_for_width(ref, mid) < cfg.param_budget) lo = mid + 1;
    else hi = mid;
  }
  // lo is the smallest width at or above budget; its predecessor may be
  // closer.
  int best = lo;
  if (lo > 1 && std::llabs(count_for_width(ref, lo - 1) - cfg.param_budget) <
                    std::llabs(count_for_width(ref, lo) - cfg.param_budget)) {
    best = lo - 1;
  }
  const long achieved = count_for_width(cfg, best);
  if (std::llabs(achieved - cfg.param_budget) >
      static_cast<long>(0.1 * cfg.param_budget)) {
    throw ConfigError("param_budget " + std::to_string(cfg.param_budget) +
                      " unsatisfiable: closest architecture has " +
                      std::to_string(achieved) + " parameters");
  }
  return best;
}

ModelParams init_params(const SystemConfig& cfg, Rng& rng) {
  ModelParams p;
  p.variant = cfg.variant;
  p.n_rx = cfg.n_rx;
  p.n_tx = cfg.n_tx;
  p.n_cb = cfg.n_cb;
  p.n_fb = cfg.n_fb;
  p.gru_hidden = solve_gru_width(cfg);

  const int in_dim = 2 + cfg.n_cb + 2 * cfg.n_rx;
  Rng init_rng = rng.derive("init");
  p.gru.push_back(init_gru_layer(in_dim, p.gru_hidden, init_rng));
  p.gru.push_back(init_gru_layer(p.gru_hidden, p.gru_hidden, init_rng));
  p.beam_head =
      init_dense(2 * cfg.n_rx, p.gru_hidden, Activation::Linear, init_rng);
  const int fb_out = cfg.variant == Variant::C1 ? cfg.n_cb : cfg.n_fb;
  p.feedback_head =
      init_dense(fb_out, p.gru_hidden, Activation::Linear, init_rng);
  if (cfg.variant != Variant::C1) {
    const int h2 = 2 * cfg.n_tx;
    p.bs_net.push_back(init_dense(h2, cfg.n_fb, Activation::Tanh, init_rng));
    p.bs_net.push_back(init_dense(h2, h2, Activation::Tanh, init_rng));
    p.bs_net.push_back(
        init_dense(2 * cfg.n_tx, h2, Activation::Linear, init_rng));
  }

  p.conventional = codebook::conventional_codebook(cfg.n_cb, cfg.n_tx);
  // Codebook raw starts at the conventional beams so C3 training begins at
  // the C2 operating point.
  Eigen::ArrayXd raw(2 * cfg.n_tx * cfg.n_cb);
  for (int i = 0; i < cfg.n_tx; ++i) {
    for (int k = 0; k < cfg.n_cb; ++k) {
      raw[i * cfg.n_cb + k] = p.conventional.beams(i, k).real();
      raw[(cfg.n_tx + i) * cfg.n_cb + k] = p.conventional.beams(i, k).imag();
    }
  }
  p.codebook.raw = Tensor::leaf({2 * cfg.n_tx, cfg.n_cb}, std::move(raw));
  p.codebook.n_tx = cfg.n_tx;
  p.codebook.n_cb = cfg.n_cb;
  p.codebook.trainable = cfg.variant == Variant::C3;
  return p;
}

long count_params(const ModelParams& p) {
  long total = 0;
  for (const auto& g : p.gru) {
    total += gru_count(g.input_size, g.hidden_size);
  }
  auto dense = [](const DenseParams& d) {
    return d.w.size() + d.b.size();
  };
  total += dense(p.beam_head) + dense(p.feedback_head);
  for (const auto& d : p.bs_net) total += dense(d);
  if (p.codebook.trainable) total += p.codebook.raw.size();
  return total;
}

std::vector<std::pair<std::string, ad::Tensor>> trainable_params(
    ModelParams& p) {
  std::vector<std::pair<std::string, ad::Tensor>> out;
  for (size_t i = 0; i < p.gru.size(); ++i) {
    const std::string pre = "theta1.gru" + std::to_string(i) + ".";
    auto& g = p.gru[i];
    out.emplace_back(pre + "wz", g.wz);
    out.emplace_back(pre + "uz", g.uz);
    out.emplace_back(pre + "bz", g.bz);
    out.emplace_back(pre + "wr", g.wr);
    out.emplace_back(pre + "ur", g.ur);
    out.emplace_back(pre + "br", g.br);
    out.emplace_back(pre + "wh", g.wh);
    out.emplace_back(pre + "uh", g.uh);
    out.emplace_back(pre + "bh", g.bh);
  }
  out.emplace_back("theta1.beam_head.w", p.beam_head.w);
  out.emplace_back("theta1.beam_head.b", p.beam_head.b);
  out.emplace_back("theta2.feedback_head.w", p.feedback_head.w);
  out.emplace_back("theta2.feedback_head.b", p.feedback_head.b);
  for (size_t i = 0; i < p.bs_net.size(); ++i) {
    const std::string pre = "theta3.dense" + std::to_string(i) + ".";
    out.emplace_back(pre + "w", p.bs_net[i].w);
    out.emplace_back(pre + "b", p.bs_net[i].b);
  }
  if (p.codebook.trainable) {
    out.emplace_back("theta4.codebook.raw", p.codebook.raw);
  }
  return out;
}

void clear_grads(ModelParams& p) {
  for (auto& [name, t] : trainable_params(p)) t.clear_grad();
  p.codebook.raw.clear_grad();
}

}  // namespace ba::nn
