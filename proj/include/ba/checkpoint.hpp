#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "ba/autodiff.hpp"
#include "ba/baselines.hpp"
#include "ba/config.hpp"
#include "ba/nn.hpp"
#include "ba/training.hpp"

namespace ba::ckpt {

struct NamedTensor {
  std::string name;
  ad::Shape shape;
  Eigen::ArrayXd values;
};

// Self-describing container: magic, format version, payload checksum, config
// snapshot, named tensors, optional optimizer state. Byte-stable for
// identical contents.
struct Checkpoint {
  std::string scheme = "proposed";  // proposed | dnn_noa | rnn_a
  SystemConfig config;
  long iteration = 0;
  std::vector<NamedTensor> tensors;
  bool has_optimizer = false;
  long opt_step = 0;
  std::vector<Eigen::ArrayXd> opt_m1, opt_m2;  // aligned with tensors order
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint from_model(const nn::ModelParams& p, const SystemConfig& cfg,
                      long iteration,
                      const training::OptimizerState* opt = nullptr);
// Rebuilds the architecture from the stored config and copies parameters.
nn::ModelParams to_model(const Checkpoint& c,
                         training::OptimizerState* opt_out = nullptr);

Checkpoint from_dnn_noa(baselines::DnnNoaParams& p, const SystemConfig& cfg,
                        long iteration);
baselines::DnnNoaParams to_dnn_noa(const Checkpoint& c);

Checkpoint from_rnn_a(baselines::RnnAParams& p, const SystemConfig& cfg,
                      long iteration);
baselines::RnnAParams to_rnn_a(const Checkpoint& c);

}  // namespace ba::ckpt
