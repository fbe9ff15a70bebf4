#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ba {

enum class Variant { C1, C2, C3 };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);

struct TrainConfig {
  int batch = 1024;
  int iterations = 20000;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip = 5.0;
  double snr_db = 10.0;  // per-antenna training SNR
  int log_interval = 10;
  int checkpoint_interval = 0;  // 0: final checkpoint only
};

struct EvalConfig {
  int n_samples = 10000;
  std::vector<double> test_snr_db = {-10, -5, 0, 5, 10, 15, 20};
  double threshold_db = 20.0;
};

struct SystemConfig {
  int n_tx = 32;
  int n_rx = 16;
  int n_cb = 8;
  int t_steps = 16;
  int n_paths = 3;
  int n_fb = 16;
  Variant variant = Variant::C3;
  int param_budget = 500000;
  bool fixed_start = false;
  // When false, the feedback message is conditioned on y_{<T-1} only
  // (one measurement less) instead of the full sensing record.
  bool feedback_all_measurements = true;
  // Divide the objective by ||H||_F^2 instead of ||H||_F.
  bool objective_squared_norm = false;
  // Aggregate gain curves as mean of per-channel dB instead of dB of mean.
  bool mean_of_db = false;
  std::uint64_t master_seed = 1;
  TrainConfig train;
  EvalConfig eval;
};

// Parse the flat key=value config format; '#' starts a comment. An empty
// file yields the defaults above. Unknown keys are rejected by name.
SystemConfig parse_config(const std::string& path);
SystemConfig parse_config_text(const std::string& text,
                               const std::string& origin = "<string>");

// Canonical round-trippable rendering of a config.
std::string config_to_text(const SystemConfig& cfg);

void validate_config(const SystemConfig& cfg);

// Desk-scale profile used by the acceptance suite: small enough to train in
// minutes on a laptop.
SystemConfig desk_profile();

}  // namespace ba
