#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "onionsim/analytics.hpp"
#include "onionsim/config.hpp"

namespace fs = std::filesystem;
using namespace onionsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Command-line values that override the config file when given.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> trials;
  std::optional<std::string> out, protocol, adversary;
  bool oracle_mode = false;
  std::optional<std::uint32_t> n, chi, d, iterations, hops, target, i, j;
  std::optional<double> kappa;
  std::optional<std::string> schedule;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + item + "'");
    }
  }
  return out;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--trials", o.trials, "number of seeded trials");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--protocol", o.protocol, "pitree, pibfly or strawman");
  cmd->add_option("--adversary", o.adversary, "adversary strategy name");
  cmd->add_flag("--oracle-mode", o.oracle_mode, "allow strategies that read ground truth");
  cmd->add_option("--n", o.n, "number of parties");
  cmd->add_option("--kappa", o.kappa, "corrupted fraction");
  cmd->add_option("--chi", o.chi, "merging onions per message");
  cmd->add_option("--d", o.d, "rounds per epoch");
  cmd->add_option("--iterations", o.iterations, "butterfly iterations D");
  cmd->add_option("--hops", o.hops, "strawman intermediaries");
  cmd->add_option("--target", o.target, "adversary target party");
  cmd->add_option("--schedule", o.schedule, "comma-separated per-epoch drop fractions");
  cmd->add_option("--i", o.i, "first party of the swap");
  cmd->add_option("--j", o.j, "second party of the swap");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config);
  auto& p = c.params;
  if (o.protocol) p.protocol = protocol_from_string(*o.protocol);
  if (o.n) p.n_parties = *o.n;
  if (o.kappa) p.kappa = *o.kappa;
  if (o.chi) p.chi = *o.chi;
  if (o.d) p.d = *o.d;
  if (o.iterations) p.iterations = *o.iterations;
  if (o.hops) p.strawman_hops = *o.hops;
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.out) c.out = *o.out;
  if (o.adversary) c.adversary.name = *o.adversary;
  if (o.oracle_mode) c.adversary.oracle_mode = true;
  if (o.target) c.adversary.target = *o.target;
  if (o.schedule) c.adversary.schedule = parse_list(*o.schedule);
  if (o.i) c.i = *o.i;
  if (o.j) c.j = *o.j;
  return c;
}

std::ofstream open_out(const ExperimentConfig& c, const std::string& name) {
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(c.out) / name).string());
  return f;
}

PartyId party_arg(const std::optional<std::uint32_t>& v, const char* what, const ExperimentConfig& c) {
  if (!v) throw ConfigError(std::string("missing --") + what);
  if (*v < 1 || *v > c.params.n_parties) throw ConfigError(std::string("--") + what + " out of range");
  return PartyId{*v};
}

int cmd_run(const ExperimentConfig& c) {
  c.validate();
  auto strategy = c.strategy();
  const Transcript t = run(c.params, c.input(), *strategy, c.seed);
  {
    auto f = open_out(c, "transcript.log");
    write_event_log(f, t, c.to_json_text());
  }
  const CostReport cost = onion_cost(t);
  {
    auto f = open_out(c, "cost.csv");
    write_cost_csv(f, cost, c.echo());
  }
  std::ostringstream s;
  s << "# " << c.echo() << '\n'
    << "deliveries=" << t.message_delivery_count() << '\n'
    << "aborts=" << t.aborts.size() << '\n'
    << "drops=" << t.drops.size() << '\n'
    << "transmissions=" << cost.total_transmissions << '\n'
    << "onion_cost=" << cost.onion_cost << '\n'
    << "max_formed=" << cost.max_formed << '\n';
  auto f = open_out(c, "summary.txt");
  f << s.str();
  std::cout << s.str();
  return 0;
}

int cmd_equalize(const ExperimentConfig& c) {
  c.validate();
  if (c.trials < 100) throw ConfigError("equalize needs --trials >= 100");
  const PartyId i = party_arg(c.i, "i", c), j = party_arg(c.j, "j", c);
  RunFn fn = [&c](const SimpleInput& in, std::uint64_t seed) {
    auto strategy = c.strategy();
    return run(c.params, in, *strategy, seed);
  };
  const auto rep = equalizing_experiment(fn, c.input(), i, j, c.trials, c.seed);
  auto f = open_out(c, "equalize.csv");
  write_equalizing_csv(f, rep, c.echo());
  std::cout << "tv_vector=" << rep.tv_vector << " radius=" << rep.radius << " tv_vr=" << rep.tv_vr << '\n';
  return 0;
}

// Strawman plus isolating adversary on i, swapped against j, next to the
// exact isolation probability for the same sample size.
int cmd_lowerbound(ExperimentConfig c) {
  c.params.protocol = Protocol::Strawman;
  c.adversary.name = "isolating";
  if (!c.adversary.target) c.adversary.target = c.i;
  c.validate();
  if (c.trials < 100) throw ConfigError("lowerbound needs --trials >= 100");
  const PartyId i = party_arg(c.i, "i", c), j = party_arg(c.j, "j", c);
  if (PartyId{*c.adversary.target} != i) throw ConfigError("lowerbound isolates party i; --target must equal --i");
  RunFn fn = [&c](const SimpleInput& in, std::uint64_t seed) {
    auto strategy = c.strategy();
    return run(c.params, in, *strategy, seed);
  };
  const SimpleInput sigma0 = c.input();
  const auto affect = cannot_affect_check(fn, sigma0, i, j, c.trials, split_seed(c.seed, 1));
  const auto rep = equalizing_experiment(fn, sigma0, i, j, c.trials, c.seed);
  const auto iso = isolation_probability(c.params.n_parties, c.params.kappa, c.params.strawman_hops, c.trials,
                                         split_seed(c.seed, 2));
  {
    auto f = open_out(c, "lowerbound.csv");
    write_equalizing_csv(f, rep, c.echo());
    f << "# cannot_affect mean_hops=" << affect.mean_hops << " verdict=" << (affect.verdict ? "true" : "false")
      << '\n';
  }
  {
    auto f = open_out(c, "isolation.csv");
    write_isolation_csv(f, iso, c.echo());
  }
  std::cout << "isolated_sigma0=" << rep.isolated0 << " isolated_sigma1=" << rep.isolated1
            << " sigma1_vr_zero=" << rep.isolated_vr_zero1 << " sigma0_vr_positive=" << rep.isolated_vr_pos0
            << " cannot_affect=" << (affect.verdict ? "true" : "false") << '\n';
  return 0;
}

int cmd_oracles(const ExperimentConfig& c, const std::string& which) {
  const auto& o = c.oracles;
  const std::uint32_t trials = c.trials;
  if (which == "pairs") {
    const auto r = pairs_expectation_oracle(o.u, o.v, trials, c.seed, o.exhaustive && o.u <= 12);
    auto f = open_out(c, "pairs.csv");
    write_pairs_csv(f, r, c.echo());
    std::cout << "formula=" << r.formula << " empirical=" << r.empirical << '\n';
  } else if (which == "bins") {
    const auto r = balls_bins_oracle(o.balls, o.bins, o.log_lambda, trials, c.seed);
    auto f = open_out(c, "bins.csv");
    write_bins_csv(f, r, c.echo());
    std::cout << "success_fraction=" << r.success_fraction << " mean_nonempty=" << r.mean_nonempty << '\n';
  } else if (which == "zeta") {
    auto f = open_out(c, "zeta.csv");
    write_zeta_csv(f, o.alpha, c.echo());
    for (double z : zeta_recursion(o.alpha)) std::cout << z << '\n';
  } else if (which == "isolation") {
    const auto r = isolation_probability(c.params.n_parties, c.params.kappa, o.sample, trials, c.seed);
    auto f = open_out(c, "isolation.csv");
    write_isolation_csv(f, r, c.echo());
    std::cout << "exact=" << r.exact << " empirical=" << r.empirical << '\n';
  } else {
    throw ConfigError("unknown oracle '" + which + "' (expected pairs, bins, zeta or isolation)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Onion-routing protocol simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Overrides run_o, eq_o, lb_o, or_o;
  auto* run_cmd = app.add_subcommand("run", "execute one run and write its transcript");
  add_common(run_cmd, run_o);
  auto* eq_cmd = app.add_subcommand("equalize", "compare received counts under an input and its swap");
  add_common(eq_cmd, eq_o);
  auto* lb_cmd = app.add_subcommand("lowerbound", "isolation attack against the strawman protocol");
  add_common(lb_cmd, lb_o);
  auto* or_cmd = app.add_subcommand("oracles", "Monte-Carlo and exact oracles");
  add_common(or_cmd, or_o);
  std::string which;
  std::optional<std::uint32_t> u, v, balls, bins, sample;
  std::optional<double> log_lambda;
  std::optional<std::string> alpha;
  or_cmd->add_option("which", which, "pairs, bins, zeta or isolation")->required();
  or_cmd->add_option("--u", u);
  or_cmd->add_option("--v", v);
  or_cmd->add_option("--balls", balls);
  or_cmd->add_option("--bins", bins);
  or_cmd->add_option("--log-lambda", log_lambda);
  or_cmd->add_option("--sample", sample);
  or_cmd->add_option("--alpha", alpha, "comma-separated fractions for zeta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(resolve(run_o));
    if (eq_cmd->parsed()) return cmd_equalize(resolve(eq_o));
    if (lb_cmd->parsed()) return cmd_lowerbound(resolve(lb_o));
    ExperimentConfig c = resolve(or_o);
    if (u) c.oracles.u = *u;
    if (v) c.oracles.v = *v;
    if (balls) c.oracles.balls = *balls;
    if (bins) c.oracles.bins = *bins;
    if (log_lambda) c.oracles.log_lambda = *log_lambda;
    if (sample) c.oracles.sample = *sample;
    if (alpha) c.oracles.alpha = parse_list(*alpha);
    return cmd_oracles(c, which);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
