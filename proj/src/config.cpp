#include "onionsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace onionsim {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& into) {
  if (obj.contains(key) && !obj.at(key).is_null()) into = obj.at(key).get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  ExperimentConfig c;
  try {
    const json root = json::parse(text);
    reject_unknown(root,
                   {"protocol", "n_parties", "lambda", "kappa", "chi", "d", "iterations", "ckpt_freq", "threshold",
                    "abort_fanout", "strawman_hops", "prf_mode", "epsilon", "adversary", "input", "seed", "trials",
                    "out", "i", "j", "oracles"},
                   "");
    auto& p = c.params;
    if (root.contains("protocol")) p.protocol = protocol_from_string(root.at("protocol").get<std::string>());
    read(root, "n_parties", p.n_parties);
    read(root, "lambda", p.lambda);
    read(root, "kappa", p.kappa);
    read(root, "chi", p.chi);
    read(root, "d", p.d);
    read(root, "iterations", p.iterations);
    read(root, "ckpt_freq", p.ckpt_freq);
    read(root, "threshold", p.threshold);
    read(root, "abort_fanout", p.abort_fanout);
    read(root, "strawman_hops", p.strawman_hops);
    if (root.contains("prf_mode")) p.prf_mode = prf_mode_from_string(root.at("prf_mode").get<std::string>());
    read(root, "epsilon", p.epsilon);
    read(root, "seed", c.seed);
    read(root, "trials", c.trials);
    read(root, "out", c.out);
    read(root, "i", c.i);
    read(root, "j", c.j);
    if (root.contains("adversary")) {
      const auto& a = root.at("adversary");
      reject_unknown(a, {"name", "target", "schedule", "oracle_mode"}, "adversary.");
      read(a, "name", c.adversary.name);
      read(a, "target", c.adversary.target);
      read(a, "schedule", c.adversary.schedule);
      read(a, "oracle_mode", c.adversary.oracle_mode);
    }
    if (root.contains("input")) {
      const auto& in = root.at("input");
      reject_unknown(in, {"permutation", "seed"}, "input.");
      read(in, "permutation", c.permutation);
      read(in, "seed", c.input_seed);
    }
    if (root.contains("oracles")) {
      const auto& o = root.at("oracles");
      reject_unknown(o, {"u", "v", "exhaustive", "balls", "bins", "log_lambda", "sample", "alpha"}, "oracles.");
      read(o, "u", c.oracles.u);
      read(o, "v", c.oracles.v);
      read(o, "exhaustive", c.oracles.exhaustive);
      read(o, "balls", c.oracles.balls);
      read(o, "bins", c.oracles.bins);
      read(o, "log_lambda", c.oracles.log_lambda);
      read(o, "sample", c.oracles.sample);
      read(o, "alpha", c.oracles.alpha);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
  const auto& p = params;
  json root;
  root["protocol"] = to_string(p.protocol);
  root["n_parties"] = p.n_parties;
  root["lambda"] = p.lambda;
  root["kappa"] = p.kappa;
  root["chi"] = p.chi;
  root["d"] = p.d;
  root["iterations"] = p.iterations;
  root["ckpt_freq"] = p.ckpt_freq ? json(*p.ckpt_freq) : json(nullptr);
  root["threshold"] = p.threshold ? json(*p.threshold) : json(nullptr);
  root["abort_fanout"] = p.abort_fanout ? json(*p.abort_fanout) : json(nullptr);
  root["strawman_hops"] = p.strawman_hops;
  root["prf_mode"] = to_string(p.prf_mode);
  root["epsilon"] = p.epsilon;
  root["seed"] = seed;
  root["trials"] = trials;
  root["out"] = out;
  root["i"] = i ? json(*i) : json(nullptr);
  root["j"] = j ? json(*j) : json(nullptr);
  root["adversary"] = {{"name", adversary.name},
                       {"target", adversary.target ? json(*adversary.target) : json(nullptr)},
                       {"schedule", adversary.schedule},
                       {"oracle_mode", adversary.oracle_mode}};
  root["input"] = {{"permutation", permutation}, {"seed", input_seed}};
  root["oracles"] = {{"u", oracles.u},
                     {"v", oracles.v},
                     {"exhaustive", oracles.exhaustive},
                     {"balls", oracles.balls},
                     {"bins", oracles.bins},
                     {"log_lambda", oracles.log_lambda},
                     {"sample", oracles.sample},
                     {"alpha", oracles.alpha}};
  return root.dump();
}

std::string ExperimentConfig::echo() const { return std::string("version=\"") + kVersion + "\" config=" + to_json_text(); }

SimpleInput ExperimentConfig::input() const {
  if (permutation.empty()) return SimpleInput::random(params.n_parties, input_seed);
  std::vector<PartyId> r;
  for (auto v : permutation) r.push_back(PartyId{v});
  SimpleInput in = SimpleInput::from_permutation(std::move(r));
  in.validate(params.n_parties);
  return in;
}

std::unique_ptr<AdversaryStrategy> ExperimentConfig::strategy() const {
  std::optional<PartyId> target;
  if (adversary.target) {
    if (*adversary.target < 1 || *adversary.target > params.n_parties) throw ConfigError("adversary target out of range");
    target = PartyId{*adversary.target};
  }
  auto s = make_strategy(adversary.name, target, adversary.schedule);
  if (s->mode() == StrategyMode::Oracle && !adversary.oracle_mode) {
    throw ConfigError("adversary '" + adversary.name + "' reads ground truth; enable oracle mode to run it");
  }
  return s;
}

void ExperimentConfig::validate() const {
  params.validate();
  input();
  strategy();
  if (trials < 1) throw ConfigError("trials must be at least 1");
}

}  // namespace onionsim
