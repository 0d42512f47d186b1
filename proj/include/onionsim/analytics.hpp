#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "onionsim/engine.hpp"
#include "onionsim/transcript.hpp"

namespace onionsim {

// Exchanges the (message, recipient) assignments of i and j. Throws
// ConfigError when i == j.
SimpleInput swap(const SimpleInput& input, PartyId i, PartyId j);

// Number of times an onion created by `creator` was received by `relay` as
// an intermediary (not as final recipient), counted over onions that were
// delivered to `destination`.
std::uint64_t hops_count(const Transcript& t, PartyId creator, PartyId relay, PartyId destination);

// One seeded execution of a fixed protocol/adversary pair on a given input.
using RunFn = std::function<Transcript(const SimpleInput&, std::uint64_t seed)>;

RunFn make_runner(ProtocolParams params, std::string adversary, std::optional<PartyId> target = std::nullopt,
                  std::vector<double> schedule = {});

struct CannotAffectResult {
  double mean_hops = 0.0;
  bool verdict = false;  // mean <= 1/2
  std::uint32_t trials = 0;
};

// Mean of hops_count(j, i, r(j)) over `trials` runs with seeds
// split_seed(base_seed, t).
CannotAffectResult cannot_affect_check(const RunFn& run_fn, const SimpleInput& sigma, PartyId i, PartyId j,
                                       std::uint32_t trials, std::uint64_t base_seed);

struct EqualizingReport {
  std::uint32_t trials = 0;
  PartyId i, j, r;  // r is j's recipient under sigma0
  std::map<std::uint32_t, std::uint32_t> vr_hist0, vr_hist1;
  double tv_vr = 0.0;      // TV between the v_r distributions
  double tv_vector = 0.0;  // TV between full count-vector distributions
  double ci_low = 0.0, ci_high = 0.0, radius = 0.0;  // bootstrap on tv_vector
  std::uint32_t isolated0 = 0, isolated1 = 0;
  std::uint32_t isolated_vr_zero0 = 0, isolated_vr_zero1 = 0;
  std::uint32_t isolated_vr_pos0 = 0, isolated_vr_pos1 = 0;
};

// sigma1 = swap(sigma0, i, j); trial t runs both inputs with the same seed
// split_seed(base_seed, t). Throws ConfigError for fewer than 100 trials.
EqualizingReport equalizing_experiment(const RunFn& run_fn, const SimpleInput& sigma0, PartyId i, PartyId j,
                                       std::uint32_t trials, std::uint64_t base_seed,
                                       std::uint32_t bootstrap_samples = 200);

// Exact binomial coefficient; throws ConfigError on overflow.
unsigned __int128 binomial(std::uint32_t n, std::uint32_t k);

struct IsolationResult {
  std::uint32_t n = 0, green = 0, sample = 0, trials = 0;
  unsigned __int128 exact_num = 0, exact_den = 1;  // C(green, k) / C(n, k)
  double exact = 0.0;
  double empirical = 0.0;
  double relative_error = 0.0;
  double kappa_power = 0.0;  // kappa^k
};

IsolationResult isolation_probability(std::uint32_t n, double kappa, std::uint32_t sample_size, std::uint32_t trials,
                                      std::uint64_t seed);

// E[zeta_1..zeta_(m+1)] for a schedule of m fractions.
std::vector<double> zeta_recursion(const std::vector<double>& alpha);

struct PairsOracleResult {
  std::uint32_t u = 0, v = 0, trials = 0;
  double formula = 0.0;  // 2v(2v-1)/(2u-1)
  std::uint64_t formula_num = 0, formula_den = 1;
  double empirical = 0.0;
  std::optional<bool> exhaustive_match;  // exact rational comparison
};

PairsOracleResult pairs_expectation_oracle(std::uint32_t u, std::uint32_t v, std::uint32_t trials, std::uint64_t seed,
                                           bool exhaustive);

struct BallsBinsResult {
  std::uint32_t balls = 0, bins = 0, trials = 0;
  double log_lambda = 1.0;
  bool in_regime = true;  // balls <= (bins + 2) / 2
  double success_fraction = 0.0;
  double mean_nonempty = 0.0;
  double closed_form = 0.0;
};

BallsBinsResult balls_bins_oracle(std::uint32_t balls, std::uint32_t bins, double log_lambda, std::uint32_t trials,
                                  std::uint64_t seed);

// Round at which each onion left circulation (dropped, merged away,
// stranded or delivered); 0 while it is still in flight.
std::vector<std::uint32_t> terminal_rounds(const Transcript& t);

// Merging onions created by `party` still in flight after round `round`.
std::uint32_t live_merging_after(const Transcript& t, PartyId party, std::uint32_t round);

struct SurvivalTable {
  std::vector<std::uint32_t> rounds;               // diagnostic rounds
  std::vector<std::vector<std::uint32_t>> counts;  // [row][party slot]
};

SurvivalTable survival_fractions(const Transcript& t);

struct CostReport {
  std::vector<std::uint64_t> out;        // by party slot
  std::vector<std::uint64_t> per_round;  // by round - 1
  std::uint64_t total_transmissions = 0;
  std::uint32_t honest_parties = 0;
  double onion_cost = 0.0;  // mean of out over honest parties
  std::uint32_t max_formed = 0;  // X, over honest parties
  bool formed_within_bound = true;  // X <= 3 chi
};

CostReport onion_cost(const Transcript& t);

// Fraction of indistinguishable checkpoint onions dropped before epoch l
// starts, for l = 1..E+1.
std::vector<double> dropped_checkpoint_fractions(const Transcript& t);

struct RendezvousAudit {
  std::uint32_t checked = 0;
  std::uint32_t violations = 0;
  std::uint32_t missing = 0;  // expected tree merges that never happened
  std::vector<std::string> details;
};

// Checks every merge of sibling merging onions against the (party, round,
// nonce) predicted by the merge-tree construction.
RendezvousAudit audit_merge_rendezvous(const Transcript& t);

// Every drop's receiver is corrupted.
bool drops_respect_corruption(const Transcript& t);

// Every formed onion ends in exactly one terminal event.
bool terminal_events_partition(const Transcript& t);

// CSV output. Each writer emits one '#' line with the config echo, a
// header line and the data rows.
void write_equalizing_csv(std::ostream& out, const EqualizingReport& r, const std::string& echo);
void write_isolation_csv(std::ostream& out, const IsolationResult& r, const std::string& echo);
void write_zeta_csv(std::ostream& out, const std::vector<double>& alpha, const std::string& echo);
void write_pairs_csv(std::ostream& out, const PairsOracleResult& r, const std::string& echo);
void write_bins_csv(std::ostream& out, const BallsBinsResult& r, const std::string& echo);
void write_cost_csv(std::ostream& out, const CostReport& r, const std::string& echo);
void write_survival_csv(std::ostream& out, const SurvivalTable& s, const std::string& echo);

}  // namespace onionsim
