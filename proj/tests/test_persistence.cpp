#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "ba/checkpoint.hpp"
#include "ba/errors.hpp"

using namespace ba;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("ba_ckpt_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string path(const std::string& name) const {
    return (dir / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
}

SystemConfig small_cfg(Variant v) {
  SystemConfig cfg = desk_profile();
  cfg.variant = v;
  cfg.param_budget = 20000;
  if (v == Variant::C1) cfg.n_fb = cfg.n_cb;
  return cfg;
}

bool params_equal(nn::ModelParams& a, nn::ModelParams& b) {
  auto pa = nn::trainable_params(a);
  auto pb = nn::trainable_params(b);
  if (pa.size() != pb.size()) return false;
  for (size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].first != pb[i].first) return false;
    if ((pa[i].second.values() != pb[i].second.values()).any()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("model checkpoint round-trip is bitwise exact") {
  TempDir tmp;
  for (const Variant v : {Variant::C1, Variant::C2, Variant::C3}) {
    const SystemConfig cfg = small_cfg(v);
    Rng rng(321);
    nn::ModelParams p = nn::init_params(cfg, rng);
    // Perturb away from the seeded init so restore-by-reinit would fail.
    nn::trainable_params(p)[0].second.values_mutable() += 0.125;

    const std::string path = tmp.path("model_" + variant_name(v) + ".ckpt");
    ckpt::save_checkpoint(ckpt::from_model(p, cfg, 7), path);
    const ckpt::Checkpoint loaded = ckpt::load_checkpoint(path);
    CHECK(loaded.scheme == "proposed");
    CHECK(loaded.iteration == 7);
    CHECK(loaded.config.variant == v);
    CHECK_FALSE(loaded.has_optimizer);

    nn::ModelParams q = ckpt::to_model(loaded);
    CHECK(params_equal(p, q));
    // The frozen codebook travels with C1/C2 so evaluation is bit-exact.
    CHECK((q.codebook.raw.values() == p.codebook.raw.values()).all());

    // save -> load -> save reproduces the file byte for byte.
    const std::string path2 = tmp.path("model2.ckpt");
    ckpt::save_checkpoint(ckpt::from_model(q, loaded.config, 7), path2);
    CHECK(slurp(path) == slurp(path2));
  }
}

TEST_CASE("optimizer state round-trips with the model") {
  TempDir tmp;
  const SystemConfig cfg = small_cfg(Variant::C3);
  Rng rng(11);
  nn::ModelParams p = nn::init_params(cfg, rng);
  auto params = nn::trainable_params(p);
  training::OptimizerState opt = training::init_optimizer(params);
  opt.step = 42;
  for (auto& m : opt.m1) m.setConstant(0.25);
  for (auto& m : opt.m2) m.setConstant(0.0625);

  const std::string path = tmp.path("with_opt.ckpt");
  ckpt::save_checkpoint(ckpt::from_model(p, cfg, 100, &opt), path);
  const ckpt::Checkpoint loaded = ckpt::load_checkpoint(path);
  CHECK(loaded.has_optimizer);

  training::OptimizerState opt2;
  nn::ModelParams q = ckpt::to_model(loaded, &opt2);
  CHECK(params_equal(p, q));
  CHECK(opt2.step == 42);
  REQUIRE(opt2.m1.size() == opt.m1.size());
  for (size_t i = 0; i < opt.m1.size(); ++i) {
    CHECK((opt2.m1[i] == opt.m1[i]).all());
    CHECK((opt2.m2[i] == opt.m2[i]).all());
  }

  // Asking for optimizer state from a weights-only checkpoint fails.
  const std::string bare = tmp.path("bare.ckpt");
  ckpt::save_checkpoint(ckpt::from_model(p, cfg, 100), bare);
  training::OptimizerState opt3;
  CHECK_THROWS_AS(ckpt::to_model(ckpt::load_checkpoint(bare), &opt3), IoError);
}

TEST_CASE("baseline checkpoints round-trip") {
  TempDir tmp;
  SystemConfig cfg = desk_profile();
  cfg.param_budget = 20000;
  Rng rng(9);

  SUBCASE("non-adaptive probing baseline") {
    baselines::DnnNoaParams p = baselines::init_dnn_noa(cfg, rng);
    baselines::trainable_params(p)[0].second.values_mutable() += 0.5;
    const std::string path = tmp.path("noa.ckpt");
    ckpt::save_checkpoint(ckpt::from_dnn_noa(p, cfg, 3), path);
    baselines::DnnNoaParams q = ckpt::to_dnn_noa(ckpt::load_checkpoint(path));
    auto pa = baselines::trainable_params(p);
    auto pb = baselines::trainable_params(q);
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i) {
      CHECK((pa[i].second.values() == pb[i].second.values()).all());
    }
  }
  SUBCASE("adaptive ping-pong baseline") {
    baselines::RnnAParams p = baselines::init_rnn_a(cfg, rng);
    baselines::trainable_params(p)[0].second.values_mutable() += 0.5;
    const std::string path = tmp.path("rnn.ckpt");
    ckpt::save_checkpoint(ckpt::from_rnn_a(p, cfg, 3), path);
    baselines::RnnAParams q = ckpt::to_rnn_a(ckpt::load_checkpoint(path));
    auto pa = baselines::trainable_params(p);
    auto pb = baselines::trainable_params(q);
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i) {
      CHECK((pa[i].second.values() == pb[i].second.values()).all());
    }
  }
}

TEST_CASE("corrupted and malformed files are rejected with I/O errors") {
  TempDir tmp;
  const SystemConfig cfg = small_cfg(Variant::C3);
  Rng rng(2);
  nn::ModelParams p = nn::init_params(cfg, rng);
  const std::string path = tmp.path("good.ckpt");
  ckpt::save_checkpoint(ckpt::from_model(p, cfg, 1), path);
  const std::string good = slurp(path);

  SUBCASE("truncation is a checksum failure, not a crash") {
    const std::string cut = tmp.path("cut.ckpt");
    spit(cut, good.substr(0, good.size() / 2));
    CHECK_THROWS_WITH_AS(ckpt::load_checkpoint(cut),
                         doctest::Contains("checksum failure"), IoError);
  }
  SUBCASE("a flipped payload byte is a checksum failure") {
    std::string bad = good;
    bad[bad.size() - 5] ^= 0x40;
    const std::string flip = tmp.path("flip.ckpt");
    spit(flip, bad);
    CHECK_THROWS_WITH_AS(ckpt::load_checkpoint(flip),
                         doctest::Contains("checksum failure"), IoError);
  }
  SUBCASE("wrong magic") {
    std::string bad = good;
    bad[0] = 'X';
    const std::string nm = tmp.path("nomagic.ckpt");
    spit(nm, bad);
    CHECK_THROWS_WITH_AS(ckpt::load_checkpoint(nm),
                         doctest::Contains("not a checkpoint"), IoError);
  }
  SUBCASE("unsupported format version") {
    std::string bad = good;
    bad[8] = 99;  // version field follows the 8-byte magic
    const std::string nv = tmp.path("ver.ckpt");
    spit(nv, bad);
    CHECK_THROWS_WITH_AS(ckpt::load_checkpoint(nv),
                         doctest::Contains("version"), IoError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(ckpt::load_checkpoint(tmp.path("absent.ckpt")), IoError);
  }
}

TEST_CASE("scheme and variant mismatches are explicit errors") {
  TempDir tmp;
  Rng rng(4);
  const SystemConfig c2 = small_cfg(Variant::C2);
  nn::ModelParams p2 = nn::init_params(c2, rng);
  const std::string path = tmp.path("c2.ckpt");
  ckpt::save_checkpoint(ckpt::from_model(p2, c2, 1), path);

  SUBCASE("a proposed checkpoint cannot load as a baseline") {
    CHECK_THROWS_WITH_AS(ckpt::to_dnn_noa(ckpt::load_checkpoint(path)),
                         doctest::Contains("not dnn_noa"), IoError);
    CHECK_THROWS_WITH_AS(ckpt::to_rnn_a(ckpt::load_checkpoint(path)),
                         doctest::Contains("not rnn_a"), IoError);
  }
  SUBCASE("forcing a different variant onto stored tensors fails") {
    ckpt::Checkpoint c = ckpt::load_checkpoint(path);
    c.config.variant = Variant::C3;  // C3 has no frozen-codebook tensor
    CHECK_THROWS_AS(ckpt::to_model(c), IoError);
  }
  SUBCASE("tensor renames are detected") {
    ckpt::Checkpoint c = ckpt::load_checkpoint(path);
    c.tensors[0].name += "_renamed";
    CHECK_THROWS_WITH_AS(ckpt::to_model(c), doctest::Contains("mismatch"),
                         IoError);
  }
}

TEST_CASE("saving is atomic: no temp file survives, content appears whole") {
  TempDir tmp;
  const SystemConfig cfg = small_cfg(Variant::C3);
  Rng rng(8);
  nn::ModelParams p = nn::init_params(cfg, rng);
  const std::string path = tmp.path("atomic.ckpt");
  ckpt::save_checkpoint(ckpt::from_model(p, cfg, 1), path);
  CHECK(fs::exists(path));
  CHECK_FALSE(fs::exists(path + ".tmp"));
  // Overwriting an existing checkpoint also goes through the temp+rename path.
  ckpt::save_checkpoint(ckpt::from_model(p, cfg, 2), path);
  CHECK(ckpt::load_checkpoint(path).iteration == 2);
  CHECK_FALSE(fs::exists(path + ".tmp"));
}
