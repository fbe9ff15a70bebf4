#include "ba/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "ba/errors.hpp"

namespace ba::ckpt {

namespace {

constexpr char kMagic[8] = {'B', 'A', 'L', 'I', 'G', 'N', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : data) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_string(std::string& out, const std::string& s) {
  put_u64(out, s.size());
  out += s;
}
void put_array(std::string& out, const Eigen::ArrayXd& a) {
  put_u64(out, static_cast<std::uint64_t>(a.size()));
  // Little-endian doubles; raw copy is correct on this target.
  const char* bytes = reinterpret_cast<const char*>(a.data());
  out.append(bytes, bytes + a.size() * sizeof(double));
}

struct Reader {
  const std::string& data;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > data.size()) {
      throw IoError("checkpoint: truncated payload");
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  std::string str() {
    const auto n = u64();
    need(n);
    std::string s = data.substr(pos, n);
    pos += n;
    return s;
  }
  Eigen::ArrayXd array() {
    const auto n = u64();
    need(n * sizeof(double));
    Eigen::ArrayXd a(static_cast<Eigen::Index>(n));
    std::memcpy(a.data(), data.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    return a;
  }
};

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::string body;
  put_string(body, c.scheme);
  put_string(body, config_to_text(c.config));
  put_u64(body, static_cast<std::uint64_t>(c.iteration));
  put_u64(body, c.tensors.size());
  for (const auto& t : c.tensors) {
    put_string(body, t.name);
    put_u64(body, t.shape.size());
    for (const auto d : t.shape) put_u64(body, static_cast<std::uint64_t>(d));
    put_array(body, t.values);
  }
  put_u32(body, c.has_optimizer ? 1 : 0);
  if (c.has_optimizer) {
    if (c.opt_m1.size() != c.tensors.size() ||
        c.opt_m2.size() != c.tensors.size()) {
      throw ContractError("save_checkpoint: optimizer state misaligned");
    }
    put_u64(body, static_cast<std::uint64_t>(c.opt_step));
    for (const auto& a : c.opt_m1) put_array(body, a);
    for (const auto& a : c.opt_m2) put_array(body, a);
  }

  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u64(out, fnv1a(body));
  put_u64(out, body.size());
  out += body;

  // Atomic write: temp file then rename.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("checkpoint: cannot write '" + tmp + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("checkpoint: write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("checkpoint: rename to '" + path + "' failed");
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  const std::string raw = buf.str();

  if (raw.size() < sizeof(kMagic) + 4 + 16 ||
      std::memcmp(raw.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("checkpoint: '" + path + "' is not a checkpoint file");
  }
  Reader head{raw, sizeof(kMagic)};
  const auto version = head.u32();
  if (version != kVersion) {
    throw IoError("checkpoint: format version " + std::to_string(version) +
                  " unsupported (expected " + std::to_string(kVersion) + ")");
  }
  const auto checksum = head.u64();
  const auto body_size = head.u64();
  if (head.pos + body_size != raw.size()) {
    throw IoError("checkpoint: checksum failure (size mismatch, file "
                  "truncated or padded)");
  }
  const std::string body = raw.substr(head.pos);
  if (fnv1a(body) != checksum) {
    throw IoError("checkpoint: checksum failure (payload corrupted)");
  }

  Reader r{body, 0};
  Checkpoint c;
  c.scheme = r.str();
  c.config = parse_config_text(r.str(), path + "#config");
  c.iteration = static_cast<long>(r.u64());
  const auto n_tensors = r.u64();
  for (std::uint64_t i = 0; i < n_tensors; ++i) {
    NamedTensor t;
    t.name = r.str();
    const auto rank = r.u64();
    for (std::uint64_t d = 0; d < rank; ++d) {
      t.shape.push_back(static_cast<Eigen::Index>(r.u64()));
    }
    t.values = r.array();
    Eigen::Index expect = 1;
    for (const auto d : t.shape) expect *= d;
    if (expect != t.values.size()) {
      throw IoError("checkpoint: tensor '" + t.name +
                    "' shape inconsistent with payload");
    }
    c.tensors.push_back(std::move(t));
  }
  c.has_optimizer = r.u32() != 0;
  if (c.has_optimizer) {
    c.opt_step = static_cast<long>(r.u64());
    for (std::uint64_t i = 0; i < n_tensors; ++i) c.opt_m1.push_back(r.array());
    for (std::uint64_t i = 0; i < n_tensors; ++i) c.opt_m2.push_back(r.array());
  }
  return c;
}

namespace {

template <typename ParamList>
void fill_tensors(Checkpoint& c, const ParamList& params) {
  for (const auto& [name, t] : params) {
    c.tensors.push_back({name, t.shape(), t.values()});
  }
}

template <typename ParamList>
void restore_tensors(const Checkpoint& c, ParamList& params) {
  if (c.tensors.size() != params.size()) {
    throw IoError("checkpoint: expected " + std::to_string(params.size()) +
                  " tensors, found " + std::to_string(c.tensors.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    auto& [name, t] = params[i];
    const auto& stored = c.tensors[i];
    if (stored.name != name || stored.shape != t.shape()) {
      throw IoError("checkpoint: tensor mismatch at '" + stored.name +
                    "' (expected '" + name + "' with shape " +
                    ad::shape_str(t.shape()) + ")");
    }
    t.values_mutable() = stored.values;
  }
}

}  // namespace

Checkpoint from_model(const nn::ModelParams& p, const SystemConfig& cfg,
                      long iteration, const training::OptimizerState* opt) {
  Checkpoint c;
  c.scheme = "proposed";
  c.config = cfg;
  c.iteration = iteration;
  auto params = nn::trainable_params(const_cast<nn::ModelParams&>(p));
  fill_tensors(c, params);
  // C1/C2 carry the frozen codebook too so evaluation restores bit-exact.
  if (!p.codebook.trainable) {
    c.tensors.push_back({"frozen.codebook.raw", p.codebook.raw.shape(),
                         p.codebook.raw.values()});
  }
  if (opt) {
    c.has_optimizer = true;
    c.opt_step = opt->step;
    c.opt_m1 = opt->m1;
    c.opt_m2 = opt->m2;
    c.opt_m1.resize(c.tensors.size(), Eigen::ArrayXd());
    c.opt_m2.resize(c.tensors.size(), Eigen::ArrayXd());
  }
  return c;
}

nn::ModelParams to_model(const Checkpoint& c,
                         training::OptimizerState* opt_out) {
  if (c.scheme != "proposed") {
    throw IoError("checkpoint: scheme '" + c.scheme +
                  "' is not a proposed-scheme checkpoint");
  }
  Rng rng(c.config.master_seed);
  nn::ModelParams p = nn::init_params(c.config, rng);
  auto params = nn::trainable_params(p);
  const size_t extra = p.codebook.trainable ? 0 : 1;
  if (c.tensors.size() != params.size() + extra) {
    throw IoError("checkpoint: tensor count mismatch for variant " +
                  variant_name(c.config.variant));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    auto& [name, t] = params[i];
    const auto& stored = c.tensors[i];
    if (stored.name != name || stored.shape != t.shape()) {
      throw IoError("checkpoint: tensor mismatch at '" + stored.name + "'");
    }
    t.values_mutable() = stored.values;
  }
  if (extra) {
    const auto& stored = c.tensors.back();
    if (stored.name != "frozen.codebook.raw") {
      throw IoError("checkpoint: missing frozen codebook tensor");
    }
    p.codebook.raw.values_mutable() = stored.values;
  }
  if (opt_out) {
    if (!c.has_optimizer) {
      throw IoError("checkpoint: no optimizer state stored");
    }
    opt_out->step = c.opt_step;
    opt_out->m1.assign(c.opt_m1.begin(), c.opt_m1.begin() + params.size());
    opt_out->m2.assign(c.opt_m2.begin(), c.opt_m2.begin() + params.size());
  }
  return p;
}

Checkpoint from_dnn_noa(baselines::DnnNoaParams& p, const SystemConfig& cfg,
                        long iteration) {
  Checkpoint c;
  c.scheme = "dnn_noa";
  c.config = cfg;
  c.iteration = iteration;
  fill_tensors(c, baselines::trainable_params(p));
  return c;
}

baselines::DnnNoaParams to_dnn_noa(const Checkpoint& c) {
  if (c.scheme != "dnn_noa") {
    throw IoError("checkpoint: scheme '" + c.scheme + "' is not dnn_noa");
  }
  Rng rng(c.config.master_seed);
  baselines::DnnNoaParams p = baselines::init_dnn_noa(c.config, rng);
  auto params = baselines::trainable_params(p);
  restore_tensors(c, params);
  return p;
}

Checkpoint from_rnn_a(baselines::RnnAParams& p, const SystemConfig& cfg,
                      long iteration) {
  Checkpoint c;
  c.scheme = "rnn_a";
  c.config = cfg;
  c.iteration = iteration;
  fill_tensors(c, baselines::trainable_params(p));
  return c;
}

baselines::RnnAParams to_rnn_a(const Checkpoint& c) {
  if (c.scheme != "rnn_a") {
    throw IoError("checkpoint: scheme '" + c.scheme + "' is not rnn_a");
  }
  Rng rng(c.config.master_seed);
  baselines::RnnAParams p = baselines::init_rnn_a(c.config, rng);
  auto params = baselines::trainable_params(p);
  restore_tensors(c, params);
  return p;
}

}  // namespace ba::ckpt
