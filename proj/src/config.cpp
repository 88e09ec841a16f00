#include "bpfree/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace bpfree {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::InvalidConfig, "bad value '" + value + "' for " + key);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) bad_value(key, v);
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v);
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) bad_value(key, v);
    return i;
  } catch (const std::logic_error&) {
    bad_value(key, v);
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const long long i = to_int(key, v);
  if (i < 0) bad_value(key, v);
  return static_cast<std::uint64_t>(i);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  bad_value(key, v);
}

std::vector<Index> factors(const std::string& key, const std::string& s) {
  std::vector<Index> out;
  for (const auto& f : split(s, 'x')) {
    const long long v = to_int(key, f);
    if (v < 1) bad_value(key, s);
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

std::string join(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "x" : "") + std::to_string(v[i]);
  return s;
}

struct Key {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define BP_DOUBLE(k, field)                                                 \
  Key{k, [](const RunConfig& c) { return fmt(c.field); },                   \
      [](RunConfig& c, const std::string& v) { c.field = to_double(k, v); }}
#define BP_INT(k, field, T)                                                 \
  Key{k, [](const RunConfig& c) { return std::to_string(c.field); },        \
      [](RunConfig& c, const std::string& v) { c.field = static_cast<T>(to_int(k, v)); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"problem.name", [](const RunConfig& c) { return c.problem; },
          [](RunConfig& c, const std::string& v) { c.problem = v; }},
      BP_DOUBLE("problem.sigma", sigma),
      BP_DOUBLE("problem.lambda0", lambda0),
      BP_DOUBLE("problem.lambdab", lambdab),
      BP_INT("problem.residual_points", residual_points, Index),
      BP_INT("problem.initial_points", initial_points, Index),
      BP_INT("problem.boundary_points", boundary_points, Index),
      Key{"problem.data_dir", [](const RunConfig& c) { return c.data_dir; },
          [](RunConfig& c, const std::string& v) { c.data_dir = v; }},
      Key{"loss.mode",
          [](const RunConfig& c) {
            return std::string(c.loss_mode == SteinMode::SparseGrid ? "sg" : "se");
          },
          [](RunConfig& c, const std::string& v) {
            if (v == "sg") c.loss_mode = SteinMode::SparseGrid;
            else if (v == "se") c.loss_mode = SteinMode::MonteCarlo;
            else bad_value("loss.mode", v);
          }},
      BP_INT("loss.level", loss_level, int),
      BP_INT("loss.samples", loss_samples, Index),
      Key{"model.activation", [](const RunConfig& c) { return std::string(to_string(c.model.activation)); },
          [](RunConfig& c, const std::string& v) {
            c.model.activation = parse_activation(v);
          }},
      Key{"model.layers", [](const RunConfig& c) { return format_layers(c.model); },
          [](RunConfig& c, const std::string& v) {
            c.model = parse_layers(v, c.model.activation);
          }},
      BP_INT("optim.iterations", iterations, std::int64_t),
      BP_DOUBLE("optim.lr", lr),
      BP_DOUBLE("optim.beta1", beta1),
      BP_DOUBLE("optim.beta2", beta2),
      BP_DOUBLE("optim.eps", eps),
      BP_INT("optim.log_every", log_every, std::int64_t),
      BP_INT("optim.eval_every", eval_every, std::int64_t),
      BP_DOUBLE("optim.target_error", target_error),
      BP_INT("zo.queries", zo.queries, int),
      BP_DOUBLE("zo.radius", zo.radius),
      Key{"zo.distribution", [](const RunConfig& c) { return std::string(to_string(c.zo.distribution)); },
          [](RunConfig& c, const std::string& v) { c.zo.distribution = parse_perturbation(v); }},
      Key{"zo.grouping", [](const RunConfig& c) { return std::string(to_string(c.zo.grouping)); },
          [](RunConfig& c, const std::string& v) { c.zo.grouping = parse_grouping(v); }},
      Key{"zo.seed", [](const RunConfig& c) { return std::to_string(c.zo.seed); },
          [](RunConfig& c, const std::string& v) { c.zo.seed = to_u64("zo.seed", v); }},
      Key{"photonic.domain", [](const RunConfig& c) { return std::string(to_string(c.domain)); },
          [](RunConfig& c, const std::string& v) { c.domain = parse_domain(v); }},
      BP_INT("photonic.block", block, Index),
      BP_INT("noise.bits", noise.bits, int),
      BP_DOUBLE("noise.gamma", noise.gamma),
      BP_DOUBLE("noise.sigma_gamma", noise.sigma_gamma),
      BP_DOUBLE("noise.crosstalk", noise.crosstalk),
      Key{"noise.bias", [](const RunConfig& c) { return std::string(c.noise.bias ? "true" : "false"); },
          [](RunConfig& c, const std::string& v) { c.noise.bias = to_bool("noise.bias", v); }},
      Key{"noise.seed", [](const RunConfig& c) { return std::to_string(c.noise.seed); },
          [](RunConfig& c, const std::string& v) { c.noise.seed = to_u64("noise.seed", v); }},
      Key{"run.seeds",
          [](const RunConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < c.seeds.size(); ++i)
              s += (i ? "," : "") + std::to_string(c.seeds[i]);
            return s;
          },
          [](RunConfig& c, const std::string& v) {
            c.seeds.clear();
            for (const auto& s : split(v, ',')) c.seeds.push_back(to_u64("run.seeds", s));
          }},
      Key{"run.output_dir", [](const RunConfig& c) { return c.output_dir; },
          [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
  };
  return table;
}

#undef BP_DOUBLE
#undef BP_INT

MlpSpec standard_spec(Index in, Index width, Index hidden_layers, Activation act) {
  MlpSpec s;
  s.input_dim = in;
  s.activation = act;
  s.layers.push_back(LayerSpec::dense(width, in));
  for (Index i = 1; i < hidden_layers; ++i) s.layers.push_back(LayerSpec::dense(width, width));
  s.layers.push_back(LayerSpec::dense(1, width));
  return s;
}

}  // namespace

MlpSpec default_model() {
  MlpSpec s = standard_spec(2, 128, 2, Activation::Tanh);
  s.layers[1] = LayerSpec::tensorized(make_tt_layout({4, 4, 8}, {8, 4, 4}, 2));
  return s;
}

Domain parse_domain(const std::string& s) {
  if (s == "weight") return Domain::Weight;
  if (s == "phase") return Domain::Phase;
  throw Error(ErrorCode::InvalidConfig, "unknown domain '" + s + "'");
}

const char* to_string(Domain d) { return d == Domain::Weight ? "weight" : "phase"; }

std::string format_layers(const MlpSpec& spec) {
  std::string s;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    if (i) s += ",";
    if (l.kind == LayerSpec::Kind::Dense) {
      s += "dense:" + std::to_string(l.rows) + "x" + std::to_string(l.cols);
    } else {
      s += "tt:" + join(l.tt.row_factors) + ":" + join(l.tt.col_factors) + ":" + join(l.tt.ranks);
    }
  }
  return s;
}

MlpSpec parse_layers(const std::string& text, Activation activation) {
  const std::string key = "model.layers";
  MlpSpec spec;
  spec.activation = activation;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 2 && parts[0] == "dense") {
      const auto dims = factors(key, parts[1]);
      if (dims.size() != 2) bad_value(key, item);
      spec.layers.push_back(LayerSpec::dense(dims[0], dims[1]));
    } else if (parts.size() == 4 && parts[0] == "tt") {
      TTLayout l{factors(key, parts[1]), factors(key, parts[2]), factors(key, parts[3])};
      l.validate();
      spec.layers.push_back(LayerSpec::tensorized(l));
    } else {
      bad_value(key, item);
    }
  }
  if (spec.layers.empty()) bad_value(key, text);
  spec.input_dim = spec.layers.front().cols;
  spec.validate();
  return spec;
}

void RunConfig::validate() const {
  model.validate();
  zo.validate();
  noise.validate();
  if (iterations < 0) throw Error(ErrorCode::InvalidConfig, "optim.iterations must be >= 0");
  if (!(lr > 0.0)) throw Error(ErrorCode::InvalidConfig, "optim.lr must be positive");
  if (log_every < 1 || eval_every < 1) {
    throw Error(ErrorCode::InvalidConfig, "optim.log_every and optim.eval_every must be >= 1");
  }
  if (sigma < 0.0) throw Error(ErrorCode::InvalidConfig, "problem.sigma must be >= 0");
  if (seeds.empty()) throw Error(ErrorCode::InvalidConfig, "run.seeds is empty");
  if (block < 2) throw Error(ErrorCode::InvalidConfig, "photonic.block must be >= 2");
  if (model.output_dim() != 1) throw Error(ErrorCode::InvalidConfig, "model must have one output");
  SteinConfig sc;
  sc.mode = loss_mode;
  sc.level = loss_level;
  sc.samples = static_cast<int>(loss_samples);
  sc.validate();
}

bool RunConfig::operator==(const RunConfig& o) const { return to_map(*this) == to_map(o); }

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.name);
  return out;
}

std::map<std::string, std::string> to_map(const RunConfig& cfg) {
  std::map<std::string, std::string> m;
  for (const auto& k : keys()) m[k.name] = k.get(cfg);
  return m;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(cfg, trim(value));
      return;
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
}

std::string serialize(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  return out;
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    set_key(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  return parse_config(in, std::move(base));
}

std::string env_name(const std::string& key) {
  std::string s = "BPFREE_";
  for (char c : key) s += (c == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

void apply_env(RunConfig& cfg) {
  for (const auto& k : keys()) {
    if (const char* v = std::getenv(env_name(k.name).c_str())) k.set(cfg, trim(v));
  }
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> preset_names() {
  return {"bs-tt",      "bs-standard", "bs-phase",   "hjb-scaled",
          "hjb-full",   "hjb-standard", "burgers-tt", "darcy-tt"};
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.output_dir = "runs/" + name;
  c.log_every = 100;
  c.eval_every = 1000;
  const auto tt128 = make_tt_layout({4, 4, 8}, {8, 4, 4}, 2);
  if (name == "bs-tt" || name == "bs-standard" || name == "bs-phase") {
    c.problem = "black-scholes";
    if (name == "bs-standard") c.model = standard_spec(2, 128, 2, Activation::Tanh);
    c.iterations = 10000;
    c.seeds = {0, 1, 2};
    if (name == "bs-phase") {
      c.domain = Domain::Phase;
      c.noise = NoiseModel::hardware();
      c.zo.distribution = Perturbation::Rademacher;
      c.zo.radius = 2.0 * 3.14159265358979323846 / 256.0;
    }
  } else if (name == "hjb-scaled") {
    c.problem = "hjb";
    c.model = standard_spec(21, 128, 2, Activation::Sine);
    c.model.layers[0] = LayerSpec::tensorized(make_tt_layout({8, 4, 4}, {1, 3, 7}, 2));
    c.model.layers[1] = LayerSpec::tensorized(tt128);
    c.residual_points = 20;
    c.zo.grouping = Grouping::Global;  // 2 queries per step instead of 20
    c.iterations = 20000;
    c.eval_every = 500;
    c.target_error = 1e-2;
  } else if (name == "hjb-full" || name == "hjb-standard") {
    c.problem = "hjb";
    c.model = standard_spec(21, 512, 2, Activation::Sine);
    if (name == "hjb-full") {
      c.model.layers[0] = LayerSpec::tensorized(make_tt_layout({8, 4, 4, 4}, {1, 1, 3, 7}, 2));
      c.model.layers[1] = LayerSpec::tensorized(make_tt_layout({8, 4, 4, 4}, {4, 4, 4, 8}, 2));
    }
    c.zo.grouping = Grouping::Global;
    c.iterations = 20000;
  } else if (name == "burgers-tt" || name == "darcy-tt") {
    const bool burgers = name == "burgers-tt";
    c.problem = burgers ? "burgers" : "darcy";
    c.model = standard_spec(2, 100, 4, Activation::Tanh);
    for (int i = 1; i <= 3; ++i) {
      c.model.layers[std::size_t(i)] = LayerSpec::tensorized(make_tt_layout({4, 5, 5}, {5, 5, 4}, 2));
    }
    c.iterations = burgers ? 40000 : 20000;
    // desk-scale minibatches; the full point sets cost ~1.2 s per step
    if (burgers) {
      c.residual_points = 100;
      c.initial_points = 20;
      c.boundary_points = 20;
    } else {
      c.residual_points = 256;
    }
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown preset '" + name + "'");
  }
  return c;
}

}  // namespace bpfree
