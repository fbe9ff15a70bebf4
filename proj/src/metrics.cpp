#include "ba/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ba/baselines.hpp"
#include "ba/errors.hpp"

namespace ba::metrics {

namespace {
void check_unit(const char* which, const Eigen::VectorXcd& v) {
  if (std::abs(v.norm() - 1.0) > 1e-4) {
    throw ContractError(std::string("metrics: ") + which +
                        " must be unit-norm, got norm " +
                        std::to_string(v.norm()));
  }
}
}  // namespace

double beamforming_gain(const channel::Channel& h, const Eigen::VectorXcd& w,
                        const Eigen::VectorXcd& f) {
  check_unit("w", w);
  check_unit("f", f);
  return std::norm(w.dot(h.h * f));  // Eigen dot conjugates the left side
}

double receive_snr_db(const channel::Channel& h, const Eigen::VectorXcd& w,
                      const Eigen::VectorXcd& f, double sigma_n) {
  const double gain = beamforming_gain(h, w, f);
  if (sigma_n == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(std::max(gain, 1e-300) / (sigma_n * sigma_n));
}

std::pair<double, double> satisfaction_probability(
    const std::vector<double>& snr_rx_db, double threshold_db) {
  if (snr_rx_db.empty()) {
    throw ContractError("satisfaction_probability: empty record list");
  }
  long count = 0;
  for (const double s : snr_rx_db) {
    if (s > threshold_db) ++count;
  }
  const double n = static_cast<double>(snr_rx_db.size());
  const double p = static_cast<double>(count) / n;
  const double half = 1.96 * std::sqrt(p * (1.0 - p) / n);
  return {p, half};
}

std::vector<std::pair<double, double>> beampattern(const Eigen::VectorXcd& v,
                                                   int resolution) {
  if (resolution < 2) throw ContractError("beampattern: resolution >= 2");
  check_unit("v", v);
  const int n = static_cast<int>(v.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(resolution);
  for (int i = 0; i < resolution; ++i) {
    const double phi = -std::numbers::pi / 2 +
                       std::numbers::pi * i / (resolution - 1);
    const double gain = std::norm(v.dot(channel::array_response(phi, n)));
    out.emplace_back(phi, gain);
  }
  return out;
}

MetricsReport evaluate(const std::string& scheme_name, const SchemeFn& scheme,
                       const SystemConfig& cfg, int n_samples,
                       double test_snr_db, Rng& rng) {
  if (n_samples < 1) throw ContractError("evaluate: n_samples >= 1");
  const double sigma_n = std::pow(10.0, -test_snr_db / 20.0);
  MetricsReport rep;
  rep.scheme = scheme_name;
  rep.test_snr_db = test_snr_db;
  rep.n_samples = n_samples;

  double sum_gain = 0.0;
  double sum_gain_db = 0.0;
  std::vector<double> snrs;
  snrs.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    Rng ch_rng = rng.derive("eval_channel", i);
    Rng sc_rng = rng.derive("eval_scheme", i);
    const channel::Channel h =
        channel::sample_channel(cfg.n_paths, cfg.n_rx, cfg.n_tx, ch_rng);
    const auto [f, w] = scheme(h, sigma_n, sc_rng);
    ChannelRecord rec;
    rec.gain = beamforming_gain(h, w, f);
    rec.gain_db = 10.0 * std::log10(std::max(rec.gain, 1e-300));
    rec.snr_rx_db = receive_snr_db(h, w, f, sigma_n);
    rec.satisfied = rec.snr_rx_db > cfg.eval.threshold_db;
    sum_gain += rec.gain;
    sum_gain_db += rec.gain_db;
    snrs.push_back(rec.snr_rx_db);
    rep.records.push_back(rec);
  }
  // Default convention: dB of the linear mean.
  rep.mean_gain_db = cfg.mean_of_db
                         ? sum_gain_db / n_samples
                         : 10.0 * std::log10(sum_gain / n_samples);
  const auto [p, half] =
      satisfaction_probability(snrs, cfg.eval.threshold_db);
  rep.p_sat = p;
  rep.p_sat_halfwidth = half;
  return rep;
}

OverheadReport overhead(const std::string& scheme, const SystemConfig& cfg,
                        int k_users) {
  OverheadReport rep;
  rep.scheme = scheme;
  if (scheme == "exhaustive") {
    const auto [m_tx, m_rx] =
        baselines::exhaustive_split(cfg.t_steps, cfg.n_cb);
    rep.sweep_channel_uses = static_cast<long>(m_tx) * m_rx;
    rep.feedback = std::to_string(k_users) + " beam indices";
  } else if (scheme == "dnn_noa") {
    rep.sweep_channel_uses = cfg.t_steps;
    rep.feedback = std::to_string(static_cast<long>(k_users) * cfg.t_steps) +
                   " power values";
  } else if (scheme == "rnn_a") {
    rep.sweep_channel_uses = static_cast<long>(k_users) * cfg.t_steps;
    rep.feedback = "0";
  } else if (scheme == "proposed") {
    rep.sweep_channel_uses = cfg.t_steps;
    rep.feedback = std::to_string(static_cast<long>(k_users) * cfg.n_fb) +
                   " real values";
  } else {
    throw ContractError("overhead: unknown scheme '" + scheme + "'");
  }
  return rep;
}

}  // namespace ba::metrics
