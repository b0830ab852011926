#include "mvlevy/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "mvlevy/digest.hpp"
#include "mvlevy/errors.hpp"

namespace mvlevy {

namespace {

using nlohmann::json;

const std::set<std::string> kStudyKinds = {"validate",   "simulate",     "picard",
                                           "ergodicity", "rate-study",   "hoelder-study"};

class Reader {
 public:
  Reader(const json& obj, std::string base) : obj_(obj), base_(std::move(base)) {
    if (!obj_.is_object()) throw ConfigError(base_.empty() ? "/" : base_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : obj_.items())
      if (!ok.count(k)) throw ConfigError(ptr(k), "unknown key");
  }

  double number(const char* key, double& out) const {
    if (auto it = obj_.find(key); it != obj_.end()) {
      if (!it->is_number()) throw ConfigError(ptr(key), "expected a number");
      out = it->get<double>();
      if (!std::isfinite(out)) throw ConfigError(ptr(key), "must be finite");
    }
    return out;
  }

  template <class Int>
  void integer(const char* key, Int& out, Int min_value) const {
    if (auto it = obj_.find(key); it != obj_.end()) {
      if (!it->is_number_integer()) throw ConfigError(ptr(key), "expected an integer");
      if (it->is_number_unsigned()) {
        const auto v = it->get<std::uint64_t>();
        if (v > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))
          throw ConfigError(ptr(key), "out of range");
        out = static_cast<Int>(v);
      } else {
        const auto v = it->get<std::int64_t>();
        if (v < 0) throw ConfigError(ptr(key), "must be nonnegative");
        out = static_cast<Int>(v);
      }
      if (out < min_value) throw ConfigError(ptr(key), "must be at least " + std::to_string(min_value));
    }
  }

  void string(const char* key, std::string& out) const {
    if (auto it = obj_.find(key); it != obj_.end()) {
      if (!it->is_string()) throw ConfigError(ptr(key), "expected a string");
      out = it->get<std::string>();
    }
  }

  void numbers(const char* key, std::vector<double>& out) const {
    if (auto it = obj_.find(key); it != obj_.end()) {
      if (!it->is_array()) throw ConfigError(ptr(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < it->size(); ++i) {
        const json& v = (*it)[i];
        if (!v.is_number()) throw ConfigError(ptr(key) + "/" + std::to_string(i), "expected a number");
        out.push_back(v.get<double>());
        if (!std::isfinite(out.back())) throw ConfigError(ptr(key) + "/" + std::to_string(i), "must be finite");
      }
    }
  }

  const json* child(const char* key) const {
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string ptr(const std::string& key) const { return base_ + "/" + key; }

 private:
  const json& obj_;
  std::string base_;
};

void require(bool ok, const std::string& pointer, const std::string& msg) {
  if (!ok) throw ConfigError(pointer, msg);
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  Reader root(doc, "");
  root.allow({"operator", "coefficients", "sim", "study"});

  if (const json* op = root.child("operator")) {
    Reader r(*op, "/operator");
    r.allow({"n_modes", "a", "b", "g", "c_lambda", "c_beta", "c_gamma", "alpha", "theta", "p"});
    r.integer("n_modes", cfg.op.n_modes, std::size_t{1});
    r.number("a", cfg.op.a);
    r.number("b", cfg.op.b);
    r.number("g", cfg.op.g);
    r.number("c_lambda", cfg.op.c_lambda);
    r.number("c_beta", cfg.op.c_beta);
    r.number("c_gamma", cfg.op.c_gamma);
    r.number("alpha", cfg.op.alpha);
    r.number("theta", cfg.op.theta);
    r.number("p", cfg.op.p);
    require(cfg.op.c_beta >= 0.0, "/operator/c_beta", "must be nonnegative");
    require(cfg.op.c_gamma >= 0.0, "/operator/c_gamma", "must be nonnegative");
  }

  if (const json* co = root.child("coefficients")) {
    Reader r(*co, "/coefficients");
    r.allow({"variant", "a", "b_mu", "c", "K"});
    std::string variant = to_string(cfg.coeffs.variant);
    r.string("variant", variant);
    try {
      cfg.coeffs.variant = parse_variant(variant);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/coefficients/variant", e.what());
    }
    r.number("a", cfg.coeffs.a);
    r.number("b_mu", cfg.coeffs.b_mu);
    r.number("c", cfg.coeffs.c);
    r.integer("K", cfg.coeffs.K, std::size_t{0});
  }
  require(cfg.coeffs.K <= cfg.op.n_modes, "/coefficients/K", "exceeds operator.n_modes");

  if (const json* sim = root.child("sim")) {
    Reader r(*sim, "/sim");
    r.allow({"T", "h", "h_fast", "M", "seed", "xi", "eta"});
    r.number("T", cfg.sim.T);
    r.number("h", cfg.sim.h);
    r.number("h_fast", cfg.sim.h_fast);
    r.integer("M", cfg.sim.M, std::size_t{1});
    r.integer("seed", cfg.sim.seed, std::uint64_t{0});
    r.numbers("xi", cfg.sim.xi);
    r.numbers("eta", cfg.sim.eta);
  }
  require(cfg.sim.T > 0.0, "/sim/T", "must be positive");
  require(cfg.sim.h > 0.0 && cfg.sim.h <= cfg.sim.T, "/sim/h", "must lie in (0, T]");
  require(cfg.sim.h_fast > 0.0 && cfg.sim.h_fast <= 0.1, "/sim/h_fast",
          "fast step is a fraction of epsilon and must lie in (0, 0.1]");
  require(cfg.sim.xi.size() <= cfg.op.n_modes, "/sim/xi", "longer than operator.n_modes");
  require(cfg.sim.eta.size() <= cfg.op.n_modes, "/sim/eta", "longer than operator.n_modes");
  cfg.sim.xi.resize(cfg.op.n_modes, 0.0);
  cfg.sim.eta.resize(cfg.op.n_modes, 0.0);

  if (const json* st = root.child("study")) {
    Reader r(*st, "/study");
    r.allow({"kind", "grid", "m", "lambda_weight", "out_dir", "n_iters", "epsilon", "n_replicas", "fbar_mode"});
    r.string("kind", cfg.study.kind);
    r.numbers("grid", cfg.study.grid);
    r.number("m", cfg.study.m);
    r.number("lambda_weight", cfg.study.lambda_weight);
    r.string("out_dir", cfg.study.out_dir);
    r.integer("n_iters", cfg.study.n_iters, std::size_t{2});
    r.number("epsilon", cfg.study.epsilon);
    r.integer("n_replicas", cfg.study.n_replicas, std::size_t{2});
    r.string("fbar_mode", cfg.study.fbar_mode);
  }
  require(kStudyKinds.count(cfg.study.kind) == 1, "/study/kind", "unknown study kind '" + cfg.study.kind + "'");
  for (std::size_t i = 0; i < cfg.study.grid.size(); ++i)
    require(cfg.study.grid[i] > 0.0, "/study/grid/" + std::to_string(i), "grid values must be positive");
  require(cfg.study.m >= 1.0, "/study/m", "must be at least 1");
  require(cfg.study.lambda_weight >= 0.0, "/study/lambda_weight", "must be nonnegative");
  require(cfg.study.epsilon > 0.0, "/study/epsilon", "must be positive");
  try {
    (void)parse_fbar_mode(cfg.study.fbar_mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/study/fbar_mode", e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["operator"] = {{"n_modes", cfg.op.n_modes}, {"a", cfg.op.a},           {"b", cfg.op.b},
                   {"g", cfg.op.g},             {"c_lambda", cfg.op.c_lambda}, {"c_beta", cfg.op.c_beta},
                   {"c_gamma", cfg.op.c_gamma}, {"alpha", cfg.op.alpha},   {"theta", cfg.op.theta},
                   {"p", cfg.op.p}};
  j["coefficients"] = {{"variant", to_string(cfg.coeffs.variant)},
                       {"a", cfg.coeffs.a},
                       {"b_mu", cfg.coeffs.b_mu},
                       {"c", cfg.coeffs.c},
                       {"K", cfg.coeffs.K}};
  j["sim"] = {{"T", cfg.sim.T},   {"h", cfg.sim.h},       {"h_fast", cfg.sim.h_fast}, {"M", cfg.sim.M},
              {"seed", cfg.sim.seed}, {"xi", cfg.sim.xi}, {"eta", cfg.sim.eta}};
  j["study"] = {{"kind", cfg.study.kind},       {"grid", cfg.study.grid},
                {"m", cfg.study.m},             {"lambda_weight", cfg.study.lambda_weight},
                {"out_dir", cfg.study.out_dir}, {"n_iters", cfg.study.n_iters},
                {"epsilon", cfg.study.epsilon}, {"n_replicas", cfg.study.n_replicas},
                {"fbar_mode", cfg.study.fbar_mode}};
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j["study"].erase("out_dir");
  return sha256_hex(j.dump()).substr(0, 16);
}

CoefficientSet make_coefficients(const RunConfig& cfg) {
  return make_builtin(cfg.coeffs, cfg.op.n_modes, cfg.op.p);
}

SimConfig make_sim_config(const RunConfig& cfg, int threads) {
  SimConfig s;
  s.spec = cfg.op;
  s.coeffs = make_coefficients(cfg);
  s.T = cfg.sim.T;
  s.h = cfg.sim.h;
  s.M = cfg.sim.M;
  s.xi = SpectralField(cfg.sim.xi);
  s.seed = cfg.sim.seed;
  s.threads = threads;
  return s;
}

MultiscaleConfig make_multiscale_config(const RunConfig& cfg, double epsilon, int threads) {
  MultiscaleConfig m;
  m.base = make_sim_config(cfg, threads);
  m.epsilon = epsilon;
  m.h_fast = cfg.sim.h_fast * epsilon;
  m.eta = SpectralField(cfg.sim.eta);
  return m;
}

}  // namespace mvlevy
