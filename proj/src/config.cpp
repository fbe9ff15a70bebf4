#include "ba/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ba/errors.hpp"

namespace ba {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: field '" + key + "': invalid integer '" + v +
                      "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: field '" + key + "': invalid number '" + v +
                      "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: field '" + key + "': invalid bool '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigError("config: field '" + key + "': empty list");
  return out;
}

void apply_key(SystemConfig& cfg, const std::string& key,
               const std::string& value, const std::string& origin, int line) {
  if (key == "n_tx") cfg.n_tx = parse_int(key, value);
  else if (key == "n_rx") cfg.n_rx = parse_int(key, value);
  else if (key == "n_cb") cfg.n_cb = parse_int(key, value);
  else if (key == "t_steps") cfg.t_steps = parse_int(key, value);
  else if (key == "n_paths") cfg.n_paths = parse_int(key, value);
  else if (key == "n_fb") cfg.n_fb = parse_int(key, value);
  else if (key == "variant") cfg.variant = variant_from_name(value);
  else if (key == "param_budget") cfg.param_budget = parse_int(key, value);
  else if (key == "fixed_start") cfg.fixed_start = parse_bool(key, value);
  else if (key == "feedback_all_measurements")
    cfg.feedback_all_measurements = parse_bool(key, value);
  else if (key == "objective_squared_norm")
    cfg.objective_squared_norm = parse_bool(key, value);
  else if (key == "mean_of_db") cfg.mean_of_db = parse_bool(key, value);
  else if (key == "master_seed")
    cfg.master_seed = static_cast<std::uint64_t>(
        std::stoull(value));
  else if (key == "train.batch") cfg.train.batch = parse_int(key, value);
  else if (key == "train.iterations")
    cfg.train.iterations = parse_int(key, value);
  else if (key == "train.learning_rate")
    cfg.train.learning_rate = parse_double(key, value);
  else if (key == "train.beta1") cfg.train.beta1 = parse_double(key, value);
  else if (key == "train.beta2") cfg.train.beta2 = parse_double(key, value);
  else if (key == "train.epsilon")
    cfg.train.epsilon = parse_double(key, value);
  else if (key == "train.grad_clip")
    cfg.train.grad_clip = parse_double(key, value);
  else if (key == "train.snr_db") cfg.train.snr_db = parse_double(key, value);
  else if (key == "train.log_interval")
    cfg.train.log_interval = parse_int(key, value);
  else if (key == "train.checkpoint_interval")
    cfg.train.checkpoint_interval = parse_int(key, value);
  else if (key == "eval.n_samples")
    cfg.eval.n_samples = parse_int(key, value);
  else if (key == "eval.test_snr_db")
    cfg.eval.test_snr_db = parse_double_list(key, value);
  else if (key == "eval.threshold_db")
    cfg.eval.threshold_db = parse_double(key, value);
  else
    throw ConfigError("config: unknown key '" + key + "' at " + origin + ":" +
                      std::to_string(line));
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::C1: return "C1";
    case Variant::C2: return "C2";
    case Variant::C3: return "C3";
  }
  return "?";
}

Variant variant_from_name(const std::string& s) {
  if (s == "C1" || s == "c1") return Variant::C1;
  if (s == "C2" || s == "c2") return Variant::C2;
  if (s == "C3" || s == "c3") return Variant::C3;
  throw ConfigError("config: field 'variant': expected C1/C2/C3, got '" + s +
                    "'");
}

SystemConfig parse_config_text(const std::string& text,
                               const std::string& origin) {
  SystemConfig cfg;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: parse error (missing '=') at " + origin +
                        ":" + std::to_string(line));
    }
    const std::string key = trim(raw.substr(0, eq));
    const std::string value = trim(raw.substr(eq + 1));
    apply_key(cfg, key, value, origin, line);
  }
  validate_config(cfg);
  return cfg;
}

SystemConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void validate_config(const SystemConfig& cfg) {
  auto require = [](bool ok, const std::string& field,
                    const std::string& what) {
    if (!ok) throw ConfigError("config: field '" + field + "': " + what);
  };
  require(cfg.n_tx >= 1, "n_tx", "must be >= 1");
  require(cfg.n_rx >= 1, "n_rx", "must be >= 1");
  require(cfg.n_cb >= 1, "n_cb", "must be >= 1");
  require(cfg.t_steps >= 1, "t_steps", "must be >= 1");
  require(cfg.n_paths >= 1, "n_paths", "must be >= 1");
  require(cfg.n_fb >= 1, "n_fb", "must be >= 1");
  require(cfg.param_budget >= 1, "param_budget", "must be >= 1");
  require(cfg.train.batch >= 1, "train.batch", "must be >= 1");
  require(cfg.train.iterations >= 0, "train.iterations", "must be >= 0");
  require(cfg.train.learning_rate >= 0, "train.learning_rate",
          "must be >= 0");
  require(cfg.train.grad_clip > 0, "train.grad_clip", "must be > 0");
  require(cfg.train.log_interval >= 1, "train.log_interval", "must be >= 1");
  require(cfg.eval.n_samples >= 1, "eval.n_samples", "must be >= 1");
}

std::string config_to_text(const SystemConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "n_tx = " << cfg.n_tx << "\n";
  os << "n_rx = " << cfg.n_rx << "\n";
  os << "n_cb = " << cfg.n_cb << "\n";
  os << "t_steps = " << cfg.t_steps << "\n";
  os << "n_paths = " << cfg.n_paths << "\n";
  os << "n_fb = " << cfg.n_fb << "\n";
  os << "variant = " << variant_name(cfg.variant) << "\n";
  os << "param_budget = " << cfg.param_budget << "\n";
  os << "fixed_start = " << (cfg.fixed_start ? "true" : "false") << "\n";
  os << "feedback_all_measurements = "
     << (cfg.feedback_all_measurements ? "true" : "false") << "\n";
  os << "objective_squared_norm = "
     << (cfg.objective_squared_norm ? "true" : "false") << "\n";
  os << "mean_of_db = " << (cfg.mean_of_db ? "true" : "false") << "\n";
  os << "master_seed = " << cfg.master_seed << "\n";
  os << "train.batch = " << cfg.train.batch << "\n";
  os << "train.iterations = " << cfg.train.iterations << "\n";
  os << "train.learning_rate = " << cfg.train.learning_rate << "\n";
  os << "train.beta1 = " << cfg.train.beta1 << "\n";
  os << "train.beta2 = " << cfg.train.beta2 << "\n";
  os << "train.epsilon = " << cfg.train.epsilon << "\n";
  os << "train.grad_clip = " << cfg.train.grad_clip << "\n";
  os << "train.snr_db = " << cfg.train.snr_db << "\n";
  os << "train.log_interval = " << cfg.train.log_interval << "\n";
  os << "train.checkpoint_interval = " << cfg.train.checkpoint_interval
     << "\n";
  os << "eval.n_samples = " << cfg.eval.n_samples << "\n";
  os << "eval.test_snr_db = ";
  for (size_t i = 0; i < cfg.eval.test_snr_db.size(); ++i) {
    os << (i ? "," : "") << cfg.eval.test_snr_db[i];
  }
  os << "\n";
  os << "eval.threshold_db = " << cfg.eval.threshold_db << "\n";
  return os.str();
}

SystemConfig desk_profile() {
  SystemConfig cfg;
  cfg.n_tx = 16;
  cfg.n_rx = 8;
  cfg.n_cb = 4;
  cfg.t_steps = 8;
  cfg.n_paths = 1;
  cfg.n_fb = 16;
  cfg.param_budget = 50000;
  cfg.train.batch = 64;
  cfg.train.iterations = 500;
  cfg.eval.n_samples = 2000;
  cfg.eval.test_snr_db = {5.0};
  return cfg;
}

}  // namespace ba
