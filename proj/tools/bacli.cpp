// Command-line harness: training, evaluation, figure sweeps, beampattern
// dumps, and checkpoint inspection for the beam-alignment simulator.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime/numerical error,
// 3 I/O error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ba/baselines.hpp"
#include "ba/channel.hpp"
#include "ba/checkpoint.hpp"
#include "ba/codebook.hpp"
#include "ba/config.hpp"
#include "ba/errors.hpp"
#include "ba/metrics.hpp"
#include "ba/nn.hpp"
#include "ba/protocol.hpp"
#include "ba/training.hpp"

namespace fs = std::filesystem;
using namespace ba;

namespace {

// Deterministic decimal rendering for CSV cells.
std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Atomic file write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp + "'");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("rename to '" + path + "' failed");
  }
}

Eigen::VectorXcd to_vec(const ad::ComplexTensor& v) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = {v.re.values()[i], v.im.values()[i]};
  }
  return out;
}

// The out-dir may be overridden by environment, and only the out-dir.
std::string resolve_out_dir(const std::string& cli_value) {
  if (const char* env = std::getenv("BACLI_OUT_DIR")) return env;
  return cli_value;
}

// ---------------------------------------------------------------------------
// Scheme construction for evaluation

struct SchemeBundle {
  std::string name;
  metrics::SchemeFn fn;
};

SchemeBundle make_proposed_scheme(const ckpt::Checkpoint& ck) {
  auto model = std::make_shared<nn::ModelParams>(ckpt::to_model(ck));
  const SystemConfig cfg = ck.config;
  metrics::SchemeFn fn = [model, cfg](const channel::Channel& h,
                                      double sigma_n, Rng& rng) {
    protocol::RunOptions opts;
    opts.sigma_n = sigma_n;
    const protocol::EpisodeTrace tr =
        protocol::run_episode(h, *model, cfg, opts, rng);
    return std::make_pair(to_vec(tr.f_final), to_vec(tr.w_final));
  };
  return {"proposed_" + variant_name(cfg.variant), std::move(fn)};
}

SchemeBundle make_dnn_noa_scheme(const ckpt::Checkpoint& ck) {
  auto p = std::make_shared<baselines::DnnNoaParams>(ckpt::to_dnn_noa(ck));
  const SystemConfig cfg = ck.config;
  metrics::SchemeFn fn = [p, cfg](const channel::Channel& h, double sigma_n,
                                  Rng& rng) {
    const baselines::BaselineTrace tr =
        baselines::run_dnn_noa_episode(h, *p, cfg, sigma_n, rng);
    return std::make_pair(to_vec(tr.f_final), to_vec(tr.w_final));
  };
  return {"dnn_noa", std::move(fn)};
}

SchemeBundle make_rnn_a_scheme(const ckpt::Checkpoint& ck) {
  auto p = std::make_shared<baselines::RnnAParams>(ckpt::to_rnn_a(ck));
  const SystemConfig cfg = ck.config;
  metrics::SchemeFn fn = [p, cfg](const channel::Channel& h, double sigma_n,
                                  Rng& rng) {
    const baselines::BaselineTrace tr =
        baselines::run_rnn_a_episode(h, *p, cfg, sigma_n, rng);
    return std::make_pair(to_vec(tr.f_final), to_vec(tr.w_final));
  };
  return {"rnn_a", std::move(fn)};
}

SchemeBundle make_mrt_mrc_scheme() {
  metrics::SchemeFn fn = [](const channel::Channel& h, double, Rng&) {
    return baselines::mrt_mrc(h);
  };
  return {"mrt_mrc", std::move(fn)};
}

SchemeBundle make_exhaustive_scheme(const SystemConfig& cfg) {
  const auto [m_tx, m_rx] =
      baselines::exhaustive_split(cfg.t_steps, cfg.n_cb);
  auto cb_tx = std::make_shared<codebook::ConventionalCodebook>(
      codebook::conventional_codebook(m_tx, cfg.n_tx));
  auto cb_rx = std::make_shared<codebook::ConventionalCodebook>(
      codebook::conventional_codebook(m_rx, cfg.n_rx));
  metrics::SchemeFn fn = [cb_tx, cb_rx](const channel::Channel& h,
                                        double sigma_n, Rng& rng) {
    const baselines::ExhaustiveResult r =
        baselines::exhaustive_search(h, *cb_tx, *cb_rx, sigma_n, rng);
    return std::make_pair(r.f, r.w);
  };
  return {"exhaustive", std::move(fn)};
}

SchemeBundle scheme_from_checkpoint(const ckpt::Checkpoint& ck) {
  if (ck.scheme == "proposed") return make_proposed_scheme(ck);
  if (ck.scheme == "dnn_noa") return make_dnn_noa_scheme(ck);
  if (ck.scheme == "rnn_a") return make_rnn_a_scheme(ck);
  throw IoError("checkpoint scheme '" + ck.scheme + "' is not evaluable");
}

// ---------------------------------------------------------------------------
// Training drivers

std::string log_header() {
  return "iteration,mean_objective,mean_gain_db,grad_norm,elapsed_s\n";
}

std::string log_row(const training::TrainStats& s) {
  return std::to_string(s.iteration) + "," + num(s.mean_objective) + "," +
         num(s.mean_gain_db) + "," + num(s.grad_norm) + "," +
         num(s.elapsed_s) + "\n";
}

// Trains the proposed scheme from scratch, writing periodic log rows and
// checkpoints plus a final checkpoint under out_dir.
void train_proposed(const SystemConfig& cfg, const std::string& out_dir,
                    bool quiet) {
  Rng init_rng(cfg.master_seed);
  nn::ModelParams p = nn::init_params(cfg, init_rng);
  auto params = nn::trainable_params(p);
  training::OptimizerState opt = training::init_optimizer(params);

  std::string log = log_header();
  training::train(p, opt, cfg, 0, [&](const training::TrainStats& s) {
    const bool last = s.iteration + 1 == cfg.train.iterations;
    if (s.iteration % cfg.train.log_interval == 0 || last) {
      log += log_row(s);
      if (!quiet) {
        std::cout << "iter " << s.iteration << " objective "
                  << num(s.mean_objective) << " gain_db "
                  << num(s.mean_gain_db) << "\n";
      }
    }
    if (cfg.train.checkpoint_interval > 0 &&
        (s.iteration + 1) % cfg.train.checkpoint_interval == 0 && !last) {
      ckpt::save_checkpoint(
          ckpt::from_model(p, cfg, s.iteration + 1, &opt),
          (fs::path(out_dir) /
           ("checkpoint_" + std::to_string(s.iteration + 1) + ".ckpt"))
              .string());
    }
  });
  ckpt::save_checkpoint(
      ckpt::from_model(p, cfg, cfg.train.iterations, &opt),
      (fs::path(out_dir) / "checkpoint_final.ckpt").string());
  write_file_atomic((fs::path(out_dir) / "train_log.csv").string(), log);
}

// Trains one of the learned baselines with the shared batched-ascent step.
void train_baseline(const std::string& scheme, const SystemConfig& cfg,
                    const std::string& out_dir, bool quiet) {
  Rng init_rng(cfg.master_seed);
  baselines::DnnNoaParams noa;
  baselines::RnnAParams rnn;
  std::vector<std::pair<std::string, ad::Tensor>> params;
  if (scheme == "dnn_noa") {
    noa = baselines::init_dnn_noa(cfg, init_rng);
    params = baselines::trainable_params(noa);
  } else {
    rnn = baselines::init_rnn_a(cfg, init_rng);
    params = baselines::trainable_params(rnn);
  }
  training::OptimizerState opt = training::init_optimizer(params);
  const double sigma_n = std::pow(10.0, -cfg.train.snr_db / 20.0);

  auto episode_fn = [&](const channel::Channel& h,
                        Rng& rng) -> training::EpisodeOutcome {
    const baselines::BaselineTrace tr =
        scheme == "dnn_noa"
            ? baselines::run_dnn_noa_episode(h, noa, cfg, sigma_n, rng)
            : baselines::run_rnn_a_episode(h, rnn, cfg, sigma_n, rng);
    training::EpisodeOutcome out;
    out.w_final = tr.w_final;
    out.f_final = tr.f_final;
    return out;
  };

  std::string log = log_header();
  Rng master(cfg.master_seed);
  for (long it = 0; it < cfg.train.iterations; ++it) {
    const training::TrainStats s =
        training::train_step_generic(episode_fn, params, opt, cfg, it, master);
    const bool last = it + 1 == cfg.train.iterations;
    if (it % cfg.train.log_interval == 0 || last) {
      log += log_row(s);
      if (!quiet) {
        std::cout << "iter " << it << " objective " << num(s.mean_objective)
                  << " gain_db " << num(s.mean_gain_db) << "\n";
      }
    }
  }
  const ckpt::Checkpoint c =
      scheme == "dnn_noa"
          ? ckpt::from_dnn_noa(noa, cfg, cfg.train.iterations)
          : ckpt::from_rnn_a(rnn, cfg, cfg.train.iterations);
  ckpt::save_checkpoint(
      c, (fs::path(out_dir) / "checkpoint_final.ckpt").string());
  write_file_atomic((fs::path(out_dir) / "train_log.csv").string(), log);
}

int run_train(const std::string& config_path, const std::string& out_dir_raw,
              const std::string& scheme, bool quiet) {
  const SystemConfig cfg = parse_config(config_path);  // validates first
  const std::string out_dir = resolve_out_dir(out_dir_raw);
  fs::create_directories(out_dir);
  if (scheme == "proposed") {
    train_proposed(cfg, out_dir, quiet);
  } else {
    train_baseline(scheme, cfg, out_dir, quiet);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Evaluation

std::string results_header() {
  return "scheme,test_snr_db,mean_gain_db,p_sat,p_sat_halfwidth,n_samples,"
         "seed\n";
}

std::string results_row(const metrics::MetricsReport& r, std::uint64_t seed) {
  return r.scheme + "," + num(r.test_snr_db) + "," + num(r.mean_gain_db) +
         "," + num(r.p_sat) + "," + num(r.p_sat_halfwidth) + "," +
         std::to_string(r.n_samples) + "," + std::to_string(seed) + "\n";
}

int run_eval(const std::string& ckpt_path, const std::string& scheme_name,
             const std::string& config_path, const std::string& out_path,
             int n_samples_override, const std::vector<double>& snr_override,
             std::optional<std::uint64_t> seed_override) {
  SystemConfig cfg;
  SchemeBundle scheme;
  if (!ckpt_path.empty()) {
    const ckpt::Checkpoint ck = ckpt::load_checkpoint(ckpt_path);
    cfg = ck.config;
    scheme = scheme_from_checkpoint(ck);
  } else {
    if (scheme_name != "mrt_mrc" && scheme_name != "exhaustive") {
      throw ConfigError("eval: scheme '" + scheme_name +
                        "' requires --checkpoint");
    }
    cfg = config_path.empty() ? SystemConfig{} : parse_config(config_path);
    scheme = scheme_name == "mrt_mrc" ? make_mrt_mrc_scheme()
                                      : make_exhaustive_scheme(cfg);
  }
  if (!config_path.empty() && !ckpt_path.empty()) {
    // Explicit config overrides the checkpoint's evaluation settings only;
    // the architecture always follows the checkpoint.
    const SystemConfig over = parse_config(config_path);
    cfg.eval = over.eval;
    cfg.master_seed = over.master_seed;
  }
  if (n_samples_override > 0) cfg.eval.n_samples = n_samples_override;
  if (!snr_override.empty()) cfg.eval.test_snr_db = snr_override;
  const std::uint64_t seed =
      seed_override ? *seed_override : cfg.master_seed;

  std::string csv = results_header();
  for (const double snr : cfg.eval.test_snr_db) {
    Rng rng(seed);
    const metrics::MetricsReport rep = metrics::evaluate(
        scheme.name, scheme.fn, cfg, cfg.eval.n_samples, snr, rng);
    csv += results_row(rep, seed);
  }
  write_file_atomic(out_path, csv);
  return 0;
}

// ---------------------------------------------------------------------------
// Figure sweeps

std::string sweep_header() {
  return "scheme_or_variant,x_value,mean_gain_db,p_sat,seed\n";
}

// Trains the proposed scheme in memory and returns evaluable params.
SchemeBundle train_proposed_in_memory(const SystemConfig& cfg) {
  Rng init_rng(cfg.master_seed);
  auto model = std::make_shared<nn::ModelParams>(nn::init_params(cfg, init_rng));
  auto params = nn::trainable_params(*model);
  training::OptimizerState opt = training::init_optimizer(params);
  training::train(*model, opt, cfg, 0, nullptr);
  metrics::SchemeFn fn = [model, cfg](const channel::Channel& h,
                                      double sigma_n, Rng& rng) {
    protocol::RunOptions opts;
    opts.sigma_n = sigma_n;
    const protocol::EpisodeTrace tr =
        protocol::run_episode(h, *model, cfg, opts, rng);
    return std::make_pair(to_vec(tr.f_final), to_vec(tr.w_final));
  };
  return {"proposed_" + variant_name(cfg.variant), std::move(fn)};
}

SchemeBundle train_baseline_in_memory(const std::string& scheme,
                                      const SystemConfig& cfg) {
  Rng init_rng(cfg.master_seed);
  const double sigma_tr = std::pow(10.0, -cfg.train.snr_db / 20.0);
  if (scheme == "dnn_noa") {
    auto p = std::make_shared<baselines::DnnNoaParams>(
        baselines::init_dnn_noa(cfg, init_rng));
    auto params = baselines::trainable_params(*p);
    training::OptimizerState opt = training::init_optimizer(params);
    Rng master(cfg.master_seed);
    auto episode_fn = [p, cfg, sigma_tr](const channel::Channel& h,
                                         Rng& rng) -> training::EpisodeOutcome {
      const auto tr = baselines::run_dnn_noa_episode(h, *p, cfg, sigma_tr, rng);
      return {tr.w_final, tr.f_final, {}};
    };
    for (long it = 0; it < cfg.train.iterations; ++it) {
      training::train_step_generic(episode_fn, params, opt, cfg, it, master);
    }
    metrics::SchemeFn fn = [p, cfg](const channel::Channel& h, double sigma_n,
                                    Rng& rng) {
      const auto tr = baselines::run_dnn_noa_episode(h, *p, cfg, sigma_n, rng);
      return std::make_pair(to_vec(tr.f_final), to_vec(tr.w_final));
    };
    return {"dnn_noa", std::move(fn)};
  }
  auto p = std::make_shared<baselines::RnnAParams>(
      baselines::init_rnn_a(cfg, init_rng));
  auto params = baselines::trainable_params(*p);
  training::OptimizerState opt = training::init_optimizer(params);
  Rng master(cfg.master_seed);
  auto episode_fn = [p, cfg, sigma_tr](const channel::Channel& h,
                                       Rng& rng) -> training::EpisodeOutcome {
    const auto tr = baselines::run_rnn_a_episode(h, *p, cfg, sigma_tr, rng);
    return {tr.w_final, tr.f_final, {}};
  };
  for (long it = 0; it < cfg.train.iterations; ++it) {
    training::train_step_generic(episode_fn, params, opt, cfg, it, master);
  }
  metrics::SchemeFn fn = [p, cfg](const channel::Channel& h, double sigma_n,
                                  Rng& rng) {
    const auto tr = baselines::run_rnn_a_episode(h, *p, cfg, sigma_n, rng);
    return std::make_pair(to_vec(tr.f_final), to_vec(tr.w_final));
  };
  return {"rnn_a", std::move(fn)};
}

std::string sweep_rows(const SchemeBundle& scheme, const SystemConfig& cfg,
                       double x_value, double snr) {
  Rng rng(cfg.master_seed);
  const metrics::MetricsReport rep = metrics::evaluate(
      scheme.name, scheme.fn, cfg, cfg.eval.n_samples, snr, rng);
  return scheme.name + "," + num(x_value) + "," + num(rep.mean_gain_db) +
         "," + num(rep.p_sat) + "," + std::to_string(cfg.master_seed) + "\n";
}

// Sensing-budget axis: values below, at, and above the codebook size.
std::vector<int> t_axis(const SystemConfig& cfg) {
  return {std::max(1, cfg.n_cb / 2), cfg.n_cb, 2 * cfg.n_cb};
}

int run_sweep(const std::string& kind, const std::string& config_path,
              const std::string& out_dir_raw, bool quiet) {
  const SystemConfig base = parse_config(config_path);
  const std::string out_dir = resolve_out_dir(out_dir_raw);
  fs::create_directories(out_dir);
  std::string csv = sweep_header();

  if (kind == "fig4") {
    // Gain versus test SNR for the three variant depths.
    for (const Variant v : {Variant::C1, Variant::C2, Variant::C3}) {
      SystemConfig cfg = base;
      cfg.variant = v;
      if (!quiet) std::cout << "training variant " << variant_name(v) << "\n";
      const SchemeBundle scheme = train_proposed_in_memory(cfg);
      for (const double snr : cfg.eval.test_snr_db) {
        csv += sweep_rows(scheme, cfg, snr, snr);
      }
    }
  } else if (kind == "fig5") {
    // Gain versus sensing budget T for C2 and C3; fresh model per T.
    const double snr = base.eval.test_snr_db.front();
    for (const Variant v : {Variant::C2, Variant::C3}) {
      for (const int t : t_axis(base)) {
        SystemConfig cfg = base;
        cfg.variant = v;
        cfg.t_steps = t;
        if (!quiet) {
          std::cout << "training " << variant_name(v) << " T=" << t << "\n";
        }
        const SchemeBundle scheme = train_proposed_in_memory(cfg);
        csv += sweep_rows(scheme, cfg, t, snr);
      }
    }
  } else if (kind == "fig6") {
    // Gain versus T for the proposed scheme against all baselines, with the
    // sweep start index fixed to zero.
    const double snr = base.eval.test_snr_db.front();
    for (const int t : t_axis(base)) {
      SystemConfig cfg = base;
      cfg.t_steps = t;
      cfg.fixed_start = true;
      if (!quiet) std::cout << "sweeping T=" << t << "\n";
      csv += sweep_rows(train_proposed_in_memory(cfg), cfg, t, snr);
      csv += sweep_rows(train_baseline_in_memory("dnn_noa", cfg), cfg, t, snr);
      csv += sweep_rows(train_baseline_in_memory("rnn_a", cfg), cfg, t, snr);
      csv += sweep_rows(make_exhaustive_scheme(cfg), cfg, t, snr);
    }
  } else {
    throw ConfigError("sweep: unknown kind '" + kind +
                      "' (expected fig4|fig5|fig6)");
  }
  write_file_atomic((fs::path(out_dir) / (kind + ".csv")).string(), csv);
  return 0;
}

// ---------------------------------------------------------------------------
// Beampattern dump

int run_beampattern(const std::string& ckpt_path, std::uint64_t channel_seed,
                    const std::string& out_path) {
  const ckpt::Checkpoint ck = ckpt::load_checkpoint(ckpt_path);
  const nn::ModelParams model = ckpt::to_model(ck);
  const SystemConfig cfg = ck.config;

  Rng ch_rng(channel_seed);
  const channel::Channel h =
      channel::sample_channel(cfg.n_paths, cfg.n_rx, cfg.n_tx, ch_rng);
  Rng ep_rng = Rng(channel_seed).derive("episode");
  protocol::RunOptions opts;
  opts.sigma_n = std::pow(10.0, -cfg.train.snr_db / 20.0);
  opts.forced_start = 0;
  const protocol::EpisodeTrace tr =
      protocol::run_episode(h, model, cfg, opts, ep_rng);

  constexpr int kResolution = 181;  // 1-degree grid over [-90, 90]
  std::string csv = "side,t,phi_deg,gain\n";
  auto dump = [&](const char* side, int t, const Eigen::VectorXcd& v) {
    const auto pat = metrics::beampattern(v, kResolution);
    for (int i = 0; i < kResolution; ++i) {
      csv += std::string(side) + "," + std::to_string(t) + "," +
             num(-90.0 + i) + "," + num(pat[i].second) + "\n";
    }
  };
  for (int t = 0; t < cfg.t_steps; ++t) {
    dump("bs", t, to_vec(tr.steps[t].f));
    dump("ue", t, to_vec(tr.steps[t].w));
  }
  dump("bs", cfg.t_steps, to_vec(tr.f_final));
  dump("ue", cfg.t_steps, to_vec(tr.w_final));
  write_file_atomic(out_path, csv);
  return 0;
}

// ---------------------------------------------------------------------------
// Checkpoint inspection

int run_inspect(const std::string& path) {
  const ckpt::Checkpoint c = ckpt::load_checkpoint(path);
  std::cout << "scheme: " << c.scheme << "\n";
  std::cout << "iteration: " << c.iteration << "\n";
  std::cout << "optimizer_state: " << (c.has_optimizer ? "yes" : "no") << "\n";
  long total = 0;
  std::cout << "tensors:\n";
  for (const auto& t : c.tensors) {
    std::cout << "  " << t.name << " [";
    for (size_t i = 0; i < t.shape.size(); ++i) {
      std::cout << (i ? "x" : "") << t.shape[i];
    }
    std::cout << "] " << t.values.size() << "\n";
    total += t.values.size();
  }
  std::cout << "total_values: " << total << "\n";
  std::cout << "config:\n" << config_to_text(c.config);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beam-alignment simulator: training, evaluation, and sweeps"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  auto* train = app.add_subcommand("train", "Train a scheme from a config");
  std::string train_config, train_out, train_scheme = "proposed";
  train->add_option("--config", train_config, "Config file")->required();
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--scheme", train_scheme, "Scheme to train")
      ->check(CLI::IsMember({"proposed", "dnn_noa", "rnn_a"}));

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint or scheme");
  std::string eval_ckpt, eval_scheme, eval_config, eval_out;
  int eval_samples = 0;
  std::vector<double> eval_snr;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint to evaluate");
  eval->add_option("--scheme", eval_scheme,
                   "Checkpoint-free scheme (mrt_mrc|exhaustive)");
  eval->add_option("--config", eval_config, "Config file");
  eval->add_option("--out", eval_out, "Results CSV path")->required();
  eval->add_option("--n-samples", eval_samples, "Channel sample count");
  eval->add_option("--test-snr", eval_snr, "Test SNR list (dB)");
  auto* seed_opt = eval->add_option("--seed", eval_seed, "Evaluation seed");

  auto* sweep = app.add_subcommand("sweep", "Figure-style experiment sweeps");
  std::string sweep_kind, sweep_config, sweep_out;
  sweep->add_option("kind", sweep_kind, "fig4|fig5|fig6")->required();
  sweep->add_option("--config", sweep_config, "Config file")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();

  auto* bp = app.add_subcommand("beampattern",
                                "Dump per-timestep beampatterns of an episode");
  std::string bp_ckpt, bp_out;
  std::uint64_t bp_seed = 1;
  bp->add_option("--checkpoint", bp_ckpt, "Checkpoint")->required();
  bp->add_option("--channel-seed", bp_seed, "Channel seed");
  bp->add_option("--out", bp_out, "Output CSV path")->required();

  auto* inspect =
      app.add_subcommand("inspect-checkpoint", "Print checkpoint contents");
  std::string inspect_path;
  inspect->add_option("path", inspect_path, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(train)) {
      return run_train(train_config, train_out, train_scheme, quiet);
    }
    if (app.got_subcommand(eval)) {
      if (eval_ckpt.empty() && eval_scheme.empty()) {
        throw ConfigError("eval: provide --checkpoint or --scheme");
      }
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = eval_seed;
      return run_eval(eval_ckpt, eval_scheme, eval_config, eval_out,
                      eval_samples, eval_snr, seed);
    }
    if (app.got_subcommand(sweep)) {
      return run_sweep(sweep_kind, sweep_config, sweep_out, quiet);
    }
    if (app.got_subcommand(bp)) {
      return run_beampattern(bp_ckpt, bp_seed, bp_out);
    }
    if (app.got_subcommand(inspect)) {
      return run_inspect(inspect_path);
    }
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
