#include "ba/baselines.hpp"

#include <cmath>

#include "ba/errors.hpp"

namespace ba::baselines {

using ad::ComplexTensor;
using ad::Tensor;

std::pair<int, int> exhaustive_split(int t_budget, int n_cb) {
  if (t_budget < 1) throw ContractError("exhaustive_split: need T >= 1");
  if (n_cb >= 1 && t_budget % n_cb == 0 && t_budget / n_cb >= 1) {
    return {n_cb, t_budget / n_cb};
  }
  // Most balanced factorization with M_TX >= M_RX.
  int best_rx = 1;
  for (int k = 1; k * k <= t_budget; ++k) {
    if (t_budget % k == 0) best_rx = k;
  }
  return {t_budget / best_rx, best_rx};
}

ExhaustiveResult exhaustive_search(const channel::Channel& h,
                                   const codebook::ConventionalCodebook& cb_tx,
                                   const codebook::ConventionalCodebook& cb_rx,
                                   double sigma_n, Rng& rng) {
  if (cb_tx.m < 1 || cb_rx.m < 1) {
    throw ContractError("exhaustive_search: empty codebook");
  }
  ExhaustiveResult res;
  double best = -1.0;
  for (int j = 0; j < cb_tx.m; ++j) {
    const ComplexTensor f = ad::make_complex(Eigen::VectorXcd(cb_tx.beam(j)));
    for (int k = 0; k < cb_rx.m; ++k) {
      const ComplexTensor w =
          ad::make_complex(Eigen::VectorXcd(cb_rx.beam(k)));
      const ComplexTensor y = channel::propagate(h, w, f, sigma_n, rng);
      const std::complex<double> yv{y.re.values()[0], y.im.values()[0]};
      res.measured.push_back({j, k, yv});
      const double power = std::norm(yv);
      if (power > best) {
        best = power;
        res.tx_index = j;
        res.rx_index = k;
      }
    }
  }
  res.f = cb_tx.beam(res.tx_index);
  res.w = cb_rx.beam(res.rx_index);
  return res;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> mrt_mrc(
    const channel::Channel& h) {
  if (h.frob_norm <= 0.0 || h.h.norm() == 0.0) {
    throw DegenerateInputError("mrt_mrc: zero channel");
  }
  const Eigen::MatrixXcd a = h.h.adjoint() * h.h;  // n_tx x n_tx, Hermitian
  Eigen::VectorXcd v = a.rowwise().sum();
  if (v.norm() < 1e-300) v = Eigen::VectorXcd::Unit(a.rows(), 0);
  v /= v.norm();
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXcd next = a * v;
    const double nn = next.norm();
    if (nn == 0.0) break;
    next /= nn;
    // Align phase so convergence can be measured directly.
    const std::complex<double> ip = v.dot(next);
    if (std::abs(ip) > 0) next *= std::conj(ip) / std::abs(ip);
    const double delta = (next - v).norm();
    v = next;
    if (delta < 1e-12) break;
  }
  Eigen::VectorXcd w = h.h * v;
  if (w.norm() == 0.0) {
    throw DegenerateInputError("mrt_mrc: channel maps MRT beam to zero");
  }
  w /= w.norm();
  return {v, w};  // (f, w)
}

// --- DNN_NOA ---------------------------------------------------------------

namespace {

long dense_count(int out, int in) { return static_cast<long>(out) * in + out; }

long gru_count(int input, int hidden) {
  return 3L * (static_cast<long>(hidden) * input +
               static_cast<long>(hidden) * hidden + hidden);
}

long noa_count(const SystemConfig& cfg, int q) {
  const int t = cfg.t_steps;
  long total = 2L * cfg.n_tx * t + 2L * cfg.n_rx * t;
  total += dense_count(q, 2 * t) + dense_count(q, q) +
           dense_count(2 * cfg.n_rx, q);
  total += dense_count(q, 2 * t) + dense_count(q, q) +
           dense_count(2 * cfg.n_tx, q);
  return total;
}

long rnn_a_count(const SystemConfig& cfg, int g) {
  long total = 0;
  total += gru_count(2 + 2 * cfg.n_tx, g) + gru_count(g, g) +
           dense_count(2 * cfg.n_tx, g);
  total += gru_count(2 + 2 * cfg.n_rx, g) + gru_count(g, g) +
           dense_count(2 * cfg.n_rx, g);
  return total;
}

template <typename CountFn>
int solve_width(long budget, CountFn count) {
  int lo = 1, hi = 8192;
  while (count(hi) < budget) hi *= 2;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (count(mid) < budget) lo = mid + 1;
    else hi = mid;
  }
  int best = lo;
  if (lo > 1 && std::llabs(count(lo - 1) - budget) <
                    std::llabs(count(lo) - budget)) {
    best = lo - 1;
  }
  if (std::llabs(count(best) - budget) > static_cast<long>(0.1 * budget)) {
    throw ConfigError("baseline parameter budget " + std::to_string(budget) +
                      " unsatisfiable: closest architecture has " +
                      std::to_string(count(best)) + " parameters");
  }
  return best;
}

ad::Tensor uniform_leaf(ad::Shape shape, double bound, Rng& rng) {
  Eigen::Index n = 1;
  for (const auto d : shape) n *= d;
  Eigen::ArrayXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-bound, bound);
  return Tensor::leaf(std::move(shape), std::move(v));
}

ComplexTensor probe_column(const Tensor& raw, int n_antennas, int n_cols,
                           int k) {
  Eigen::ArrayXd sel = Eigen::ArrayXd::Zero(n_cols);
  sel[k] = 1.0;
  const Tensor col = ad::matmul(raw, Tensor::leaf({n_cols}, std::move(sel)));
  (void)n_antennas;
  return nn::unit_norm_beam(col);
}

}  // namespace

DnnNoaParams init_dnn_noa(const SystemConfig& cfg, Rng& rng) {
  DnnNoaParams p;
  p.t_steps = cfg.t_steps;
  Rng r = rng.derive("init_dnn_noa");
  p.probe_tx_raw = uniform_leaf({2 * cfg.n_tx, cfg.t_steps}, 1.0, r);
  p.probe_rx_raw = uniform_leaf({2 * cfg.n_rx, cfg.t_steps}, 1.0, r);
  const int q = solve_width(cfg.param_budget,
                            [&](int w) { return noa_count(cfg, w); });
  const int t2 = 2 * cfg.t_steps;
  p.ue_net.push_back(nn::init_dense(q, t2, nn::Activation::Tanh, r));
  p.ue_net.push_back(nn::init_dense(q, q, nn::Activation::Tanh, r));
  p.ue_net.push_back(
      nn::init_dense(2 * cfg.n_rx, q, nn::Activation::Linear, r));
  p.bs_net.push_back(nn::init_dense(q, t2, nn::Activation::Tanh, r));
  p.bs_net.push_back(nn::init_dense(q, q, nn::Activation::Tanh, r));
  p.bs_net.push_back(
      nn::init_dense(2 * cfg.n_tx, q, nn::Activation::Linear, r));
  return p;
}

std::vector<std::pair<std::string, ad::Tensor>> trainable_params(
    DnnNoaParams& p) {
  std::vector<std::pair<std::string, ad::Tensor>> out;
  out.emplace_back("probe_tx_raw", p.probe_tx_raw);
  out.emplace_back("probe_rx_raw", p.probe_rx_raw);
  for (size_t i = 0; i < p.ue_net.size(); ++i) {
    out.emplace_back("ue_net" + std::to_string(i) + ".w", p.ue_net[i].w);
    out.emplace_back("ue_net" + std::to_string(i) + ".b", p.ue_net[i].b);
  }
  for (size_t i = 0; i < p.bs_net.size(); ++i) {
    out.emplace_back("bs_net" + std::to_string(i) + ".w", p.bs_net[i].w);
    out.emplace_back("bs_net" + std::to_string(i) + ".b", p.bs_net[i].b);
  }
  return out;
}

BaselineTrace run_dnn_noa_episode(const channel::Channel& h,
                                  const DnnNoaParams& p,
                                  const SystemConfig& cfg, double sigma_n,
                                  Rng& rng) {
  BaselineTrace trace;
  const double y_scale = 1.0 / std::sqrt(1.0 + sigma_n * sigma_n);
  std::vector<Tensor> meas;
  for (int t = 0; t < p.t_steps; ++t) {
    const ComplexTensor f =
        probe_column(p.probe_tx_raw, cfg.n_tx, p.t_steps, t);
    const ComplexTensor w =
        probe_column(p.probe_rx_raw, cfg.n_rx, p.t_steps, t);
    const ComplexTensor y = channel::propagate(h, w, f, sigma_n, rng);
    meas.push_back(ad::scale(ad::concat({y.re, y.im}), y_scale));
    trace.probes_tx.push_back(f);
    trace.probes_rx.push_back(w);
  }
  const Tensor m = ad::concat(meas);  // 2T reals, fed back error-free
  Tensor ue = m;
  for (const auto& layer : p.ue_net) ue = nn::dense_forward(ue, layer);
  trace.w_final = nn::unit_norm_beam(ue);
  Tensor bs = m;
  for (const auto& layer : p.bs_net) bs = nn::dense_forward(bs, layer);
  trace.f_final = nn::unit_norm_beam(bs);
  return trace;
}

// --- RNN_A -----------------------------------------------------------------

RnnAParams init_rnn_a(const SystemConfig& cfg, Rng& rng) {
  RnnAParams p;
  p.t_steps = cfg.t_steps;
  Rng r = rng.derive("init_rnn_a");
  const int g = solve_width(cfg.param_budget,
                            [&](int w) { return rnn_a_count(cfg, w); });
  p.bs_hidden = p.ue_hidden = g;
  p.bs_gru.push_back(nn::init_gru_layer(2 + 2 * cfg.n_tx, g, r));
  p.bs_gru.push_back(nn::init_gru_layer(g, g, r));
  p.bs_head = nn::init_dense(2 * cfg.n_tx, g, nn::Activation::Linear, r);
  p.ue_gru.push_back(nn::init_gru_layer(2 + 2 * cfg.n_rx, g, r));
  p.ue_gru.push_back(nn::init_gru_layer(g, g, r));
  p.ue_head = nn::init_dense(2 * cfg.n_rx, g, nn::Activation::Linear, r);
  return p;
}

std::vector<std::pair<std::string, ad::Tensor>> trainable_params(
    RnnAParams& p) {
  std::vector<std::pair<std::string, ad::Tensor>> out;
  auto add_gru = [&](const std::string& pre, nn::GruLayerParams& g) {
    out.emplace_back(pre + "wz", g.wz);
    out.emplace_back(pre + "uz", g.uz);
    out.emplace_back(pre + "bz", g.bz);
    out.emplace_back(pre + "wr", g.wr);
    out.emplace_back(pre + "ur", g.ur);
    out.emplace_back(pre + "br", g.br);
    out.emplace_back(pre + "wh", g.wh);
    out.emplace_back(pre + "uh", g.uh);
    out.emplace_back(pre + "bh", g.bh);
  };
  for (size_t i = 0; i < p.bs_gru.size(); ++i) {
    add_gru("bs.gru" + std::to_string(i) + ".", p.bs_gru[i]);
  }
  out.emplace_back("bs.head.w", p.bs_head.w);
  out.emplace_back("bs.head.b", p.bs_head.b);
  for (size_t i = 0; i < p.ue_gru.size(); ++i) {
    add_gru("ue.gru" + std::to_string(i) + ".", p.ue_gru[i]);
  }
  out.emplace_back("ue.head.w", p.ue_head.w);
  out.emplace_back("ue.head.b", p.ue_head.b);
  return out;
}

namespace {

struct SideState {
  std::vector<Tensor> hidden;
  ComplexTensor beam;
};

// Advance one side's controller on (received symbol, own previous beam).
ComplexTensor side_step(SideState& s, const ComplexTensor& y, double y_scale,
                        const std::vector<nn::GruLayerParams>& gru,
                        const nn::DenseParams& head) {
  const Tensor input = ad::concat(
      {ad::scale(ad::concat({y.re, y.im}), y_scale), s.beam.re, s.beam.im});
  Tensor layer_in = input;
  for (size_t l = 0; l < gru.size(); ++l) {
    s.hidden[l] = nn::gru_step(layer_in, s.hidden[l], gru[l]);
    layer_in = s.hidden[l];
  }
  s.beam = nn::unit_norm_beam(nn::dense_forward(s.hidden.back(), head));
  return s.beam;
}

}  // namespace

BaselineTrace run_rnn_a_episode(const channel::Channel& h, const RnnAParams& p,
                                const SystemConfig& cfg, double sigma_n,
                                Rng& rng) {
  BaselineTrace trace;
  const double y_scale = 1.0 / std::sqrt(1.0 + sigma_n * sigma_n);

  // Reciprocal uplink channel (TDD): H^T with fresh noise per use.
  channel::Channel up;
  up.h = h.h.transpose();
  up.frob_norm = h.frob_norm;

  SideState bs, ue;
  for (const auto& l : p.bs_gru) bs.hidden.push_back(Tensor::zeros({l.hidden_size}));
  for (const auto& l : p.ue_gru) ue.hidden.push_back(Tensor::zeros({l.hidden_size}));
  bs.beam = ad::complex_zeros({cfg.n_tx});
  ue.beam = ad::complex_zeros({cfg.n_rx});

  // Initial beams from zero observations; consumes no channel use.
  const ComplexTensor y0 = ad::complex_zeros({});
  side_step(bs, y0, y_scale, p.bs_gru, p.bs_head);
  side_step(ue, y0, y_scale, p.ue_gru, p.ue_head);

  for (int t = 0; t < p.t_steps; ++t) {
    if (t % 2 == 0) {
      // Downlink: BS transmits, UE receives and adapts.
      const ComplexTensor y =
          channel::propagate(h, ue.beam, bs.beam, sigma_n, rng);
      trace.probes_tx.push_back(bs.beam);
      trace.probes_rx.push_back(ue.beam);
      side_step(ue, y, y_scale, p.ue_gru, p.ue_head);
    } else {
      // Uplink over the reciprocal channel: UE transmits, BS adapts.
      const ComplexTensor y =
          channel::propagate(up, bs.beam, ue.beam, sigma_n, rng);
      trace.probes_tx.push_back(ue.beam);
      trace.probes_rx.push_back(bs.beam);
      side_step(bs, y, y_scale, p.bs_gru, p.bs_head);
    }
  }
  trace.w_final = ue.beam;
  trace.f_final = bs.beam;
  return trace;
}

}  // namespace ba::baselines
