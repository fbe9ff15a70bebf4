#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "ba/channel.hpp"
#include "ba/config.hpp"
#include "ba/rng.hpp"

namespace ba::metrics {

struct ChannelRecord {
  double gain = 0.0;
  double gain_db = 0.0;
  double snr_rx_db = 0.0;
  bool satisfied = false;
};

struct MetricsReport {
  std::string scheme;
  double test_snr_db = 0.0;
  std::vector<ChannelRecord> records;
  double mean_gain_db = 0.0;
  double p_sat = 0.0;
  double p_sat_halfwidth = 0.0;
  int n_samples = 0;
};

// |w^H H f|^2 for unit-norm beams.
double beamforming_gain(const channel::Channel& h, const Eigen::VectorXcd& w,
                        const Eigen::VectorXcd& f);

// 10 log10(gain / sigma_n^2); the noise power is the expectation
// sigma_n^2 ||w||^2, not a single realization. sigma_n = 0 returns +inf.
double receive_snr_db(const channel::Channel& h, const Eigen::VectorXcd& w,
                      const Eigen::VectorXcd& f, double sigma_n);

// Monte-Carlo satisfaction probability with 95% normal half-width.
std::pair<double, double> satisfaction_probability(
    const std::vector<double>& snr_rx_db, double threshold_db);

// |v^H a(phi)|^2 on a uniform angle grid over [-pi/2, pi/2].
std::vector<std::pair<double, double>> beampattern(const Eigen::VectorXcd& v,
                                                   int resolution);

// A scheme maps a channel and noise level to its final (f, w) beam pair.
using SchemeFn = std::function<
    std::pair<Eigen::VectorXcd, Eigen::VectorXcd>(const channel::Channel&,
                                                  double sigma_n, Rng&)>;

MetricsReport evaluate(const std::string& scheme_name, const SchemeFn& scheme,
                       const SystemConfig& cfg, int n_samples,
                       double test_snr_db, Rng& rng);

// Analytic pilot/feedback overhead per Table-style accounting for k users.
struct OverheadReport {
  std::string scheme;
  long sweep_channel_uses = 0;
  std::string feedback;
};
OverheadReport overhead(const std::string& scheme, const SystemConfig& cfg,
                        int k_users);

}  // namespace ba::metrics
