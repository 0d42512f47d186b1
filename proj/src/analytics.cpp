#include "onionsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>

namespace onionsim {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string u128(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return {s.rbegin(), s.rend()};
}

unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
  while (b != 0) {
    const auto r = a % b;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

SimpleInput swap(const SimpleInput& input, PartyId i, PartyId j) {
  if (i == j) throw ConfigError("swap needs two distinct parties");
  SimpleInput out = input;
  std::swap(out.recipients.at(i.slot()), out.recipients.at(j.slot()));
  std::swap(out.messages.at(i.slot()), out.messages.at(j.slot()));
  return out;
}

std::uint64_t hops_count(const Transcript& t, PartyId creator, PartyId relay, PartyId destination) {
  std::vector<bool> reaches(t.onions.size(), false);
  for (const auto& d : t.deliveries) {
    if (d.recipient == destination && d.payload.is_message()) reaches[d.onion_id] = true;
  }
  std::uint64_t count = 0;
  for (const auto& tx : t.transmissions) {
    if (tx.receiver != relay || !reaches[tx.onion_id]) continue;
    const auto& ann = t.onions[tx.onion_id];
    if (ann.origin != creator) continue;
    const auto& plan = t.plans[tx.onion_id];
    const std::size_t hop = tx.round - ann.formed_round;
    if (hop + 1 < plan.path.size()) ++count;
  }
  return count;
}

RunFn make_runner(ProtocolParams params, std::string adversary, std::optional<PartyId> target,
                  std::vector<double> schedule) {
  return [=](const SimpleInput& input, std::uint64_t seed) {
    auto strategy = make_strategy(adversary, target, schedule);
    return run(params, input, *strategy, seed);
  };
}

CannotAffectResult cannot_affect_check(const RunFn& run_fn, const SimpleInput& sigma, PartyId i, PartyId j,
                                       std::uint32_t trials, std::uint64_t base_seed) {
  if (trials < 1) throw ConfigError("cannot_affect_check needs at least one trial");
  std::uint64_t total = 0;
  for (std::uint32_t k = 0; k < trials; ++k) {
    total += hops_count(run_fn(sigma, split_seed(base_seed, k)), j, i, sigma.recipient(j));
  }
  CannotAffectResult r;
  r.trials = trials;
  r.mean_hops = static_cast<double>(total) / trials;
  r.verdict = r.mean_hops <= 0.5;
  return r;
}

namespace {

// Isolation flag cross-checked against the transcript.
bool isolated_in(const Transcript& t) {
  if (!t.report.isolated || !t.report.target) return false;
  const PartyId target = *t.report.target;
  std::uint64_t sent = 0, dropped = 0;
  for (const auto& tx : t.transmissions) sent += tx.sender == target;
  for (const auto& d : t.drops) dropped += d.sender == target;
  const bool audit = sent == dropped;
  if (audit != *t.report.isolated) throw SimulationError("isolation flag disagrees with the transcript");
  return audit;
}

double tv_distance(const std::vector<std::vector<std::uint32_t>>& a, const std::vector<std::vector<std::uint32_t>>& b,
                   const std::vector<std::uint32_t>& picks) {
  std::map<std::vector<std::uint32_t>, std::pair<std::int64_t, std::int64_t>> bins;
  for (auto k : picks) {
    ++bins[a[k]].first;
    ++bins[b[k]].second;
  }
  std::int64_t diff = 0;
  for (const auto& [key, c] : bins) diff += std::llabs(c.first - c.second);
  return 0.5 * static_cast<double>(diff) / static_cast<double>(picks.size());
}

}  // namespace

EqualizingReport equalizing_experiment(const RunFn& run_fn, const SimpleInput& sigma0, PartyId i, PartyId j,
                                       std::uint32_t trials, std::uint64_t base_seed,
                                       std::uint32_t bootstrap_samples) {
  if (trials < 100) throw ConfigError("equalizing experiment needs at least 100 trials, got " + std::to_string(trials));
  const SimpleInput sigma1 = swap(sigma0, i, j);
  EqualizingReport rep;
  rep.trials = trials;
  rep.i = i;
  rep.j = j;
  rep.r = sigma0.recipient(j);
  std::vector<std::vector<std::uint32_t>> v0, v1, r0, r1;
  for (std::uint32_t k = 0; k < trials; ++k) {
    const std::uint64_t seed = split_seed(base_seed, k);
    const Transcript t0 = run_fn(sigma0, seed);
    const Transcript t1 = run_fn(sigma1, seed);
    v0.push_back(t0.received_counts());
    v1.push_back(t1.received_counts());
    const std::uint32_t a = v0.back()[rep.r.slot()];
    const std::uint32_t b = v1.back()[rep.r.slot()];
    r0.push_back({a});
    r1.push_back({b});
    ++rep.vr_hist0[a];
    ++rep.vr_hist1[b];
    if (isolated_in(t0)) {
      ++rep.isolated0;
      (a == 0 ? rep.isolated_vr_zero0 : rep.isolated_vr_pos0)++;
    }
    if (isolated_in(t1)) {
      ++rep.isolated1;
      (b == 0 ? rep.isolated_vr_zero1 : rep.isolated_vr_pos1)++;
    }
  }
  std::vector<std::uint32_t> all(trials);
  std::iota(all.begin(), all.end(), 0u);
  rep.tv_vr = tv_distance(r0, r1, all);
  rep.tv_vector = tv_distance(v0, v1, all);

  Rng rng(split_seed(base_seed, 0xB0075ULL));
  std::vector<double> boot;
  for (std::uint32_t b = 0; b < bootstrap_samples; ++b) {
    std::vector<std::uint32_t> picks(trials);
    for (auto& p : picks) p = static_cast<std::uint32_t>(rng.uniform(trials));
    boot.push_back(tv_distance(v0, v1, picks));
  }
  if (!boot.empty()) {
    std::sort(boot.begin(), boot.end());
    const auto at = [&](double q) { return boot[static_cast<std::size_t>(q * (boot.size() - 1))]; };
    rep.ci_low = at(0.025);
    rep.ci_high = at(0.975);
    rep.radius = std::max(rep.tv_vector - rep.ci_low, rep.ci_high - rep.tv_vector);
  }
  return rep;
}

unsigned __int128 binomial(std::uint32_t n, std::uint32_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  const unsigned __int128 limit = ~static_cast<unsigned __int128>(0) / std::max<std::uint32_t>(n, 1);
  for (std::uint32_t i = 1; i <= k; ++i) {
    if (r > limit) throw ConfigError("binomial coefficient too large");
    r = r * (n - k + i) / i;
  }
  return r;
}

IsolationResult isolation_probability(std::uint32_t n, double kappa, std::uint32_t sample_size, std::uint32_t trials,
                                      std::uint64_t seed) {
  if (sample_size > n) throw ConfigError("sample size exceeds the number of parties");
  IsolationResult r;
  r.n = n;
  r.green = static_cast<std::uint32_t>(std::floor(kappa * n + 1e-9));
  r.sample = sample_size;
  r.trials = trials;
  auto top = binomial(r.green, sample_size);
  auto bottom = binomial(n, sample_size);
  const auto g = top == 0 ? bottom : gcd128(top, bottom);
  r.exact_num = top / g;
  r.exact_den = bottom / g;
  r.exact = static_cast<double>(r.exact_num) / static_cast<double>(r.exact_den);
  r.kappa_power = std::pow(kappa, sample_size);
  Rng rng(seed);
  std::uint32_t hits = 0;
  for (std::uint32_t t = 0; t < trials; ++t) {
    const auto s = rng.sample_without_replacement(n, sample_size);
    hits += std::all_of(s.begin(), s.end(), [&](std::uint32_t x) { return x < r.green; });
  }
  r.empirical = trials ? static_cast<double>(hits) / trials : 0.0;
  r.relative_error = r.exact > 0 ? std::abs(r.empirical - r.exact) / r.exact : std::abs(r.empirical);
  return r;
}

std::vector<double> zeta_recursion(const std::vector<double>& alpha) {
  for (double a : alpha) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("zeta recursion fractions must lie in [0, 1]");
  }
  std::vector<double> z{0.0};
  for (std::size_t l = 1; l <= alpha.size(); ++l) {
    double sum = 0.0;
    for (std::size_t tau = 0; tau < l; ++tau) sum += (1.0 - z[tau]) * alpha[tau];
    z.push_back(std::min(sum, 1.0));
  }
  return z;
}

PairsOracleResult pairs_expectation_oracle(std::uint32_t u, std::uint32_t v, std::uint32_t trials, std::uint64_t seed,
                                           bool exhaustive) {
  if (v < 1 || v > u) throw ConfigError("pairs oracle needs 1 <= v <= u");
  PairsOracleResult r;
  r.u = u;
  r.v = v;
  r.trials = trials;
  std::uint64_t fn = 2ULL * v * (2ULL * v - 1), fd = 2ULL * u - 1;
  const auto g = std::gcd(fn, fd);
  r.formula_num = fn / g;
  r.formula_den = fd / g;
  r.formula = static_cast<double>(fn) / static_cast<double>(fd);

  const std::uint32_t balls = 2 * u;
  auto paired = [&](const std::vector<bool>& chosen) {
    std::uint32_t w = 0;
    for (std::uint32_t b = 0; b < balls; ++b) w += chosen[b] && chosen[b ^ 1u];
    return w;
  };
  if (exhaustive) {
    if (balls > 24) throw ConfigError("exhaustive pairs oracle limited to u <= 12");
    unsigned __int128 sum = 0, count = 0;
    std::vector<bool> chosen(balls);
    for (std::uint32_t mask = 0; mask < (1u << balls); ++mask) {
      if (static_cast<std::uint32_t>(std::popcount(mask)) != 2 * v) continue;
      for (std::uint32_t b = 0; b < balls; ++b) chosen[b] = (mask >> b) & 1u;
      sum += paired(chosen);
      ++count;
    }
    r.exhaustive_match = sum * fd == count * fn;
  }
  Rng rng(seed);
  std::uint64_t total = 0;
  std::vector<bool> chosen(balls);
  for (std::uint32_t t = 0; t < trials; ++t) {
    std::fill(chosen.begin(), chosen.end(), false);
    for (auto b : rng.sample_without_replacement(balls, 2 * v)) chosen[b] = true;
    total += paired(chosen);
  }
  r.empirical = trials ? static_cast<double>(total) / trials : 0.0;
  return r;
}

BallsBinsResult balls_bins_oracle(std::uint32_t balls, std::uint32_t bins, double log_lambda, std::uint32_t trials,
                                  std::uint64_t seed) {
  if (bins < 1) throw ConfigError("balls-bins oracle needs at least one bin");
  BallsBinsResult r;
  r.balls = balls;
  r.bins = bins;
  r.trials = trials;
  r.log_lambda = log_lambda;
  r.in_regime = 2ULL * balls <= bins + 2ULL;
  r.closed_form = bins * (1.0 - std::pow(1.0 - 1.0 / bins, balls));
  Rng rng(seed);
  std::uint64_t nonempty_total = 0, ok = 0;
  std::vector<bool> hit(bins);
  for (std::uint32_t t = 0; t < trials; ++t) {
    std::fill(hit.begin(), hit.end(), false);
    std::uint32_t nonempty = 0;
    for (std::uint32_t b = 0; b < balls; ++b) {
      const auto k = rng.uniform(bins);
      if (!hit[k]) {
        hit[k] = true;
        ++nonempty;
      }
    }
    nonempty_total += nonempty;
    ok += static_cast<double>(nonempty) >= balls / log_lambda;
  }
  r.success_fraction = trials ? static_cast<double>(ok) / trials : 0.0;
  r.mean_nonempty = trials ? static_cast<double>(nonempty_total) / trials : 0.0;
  return r;
}

std::vector<std::uint32_t> terminal_rounds(const Transcript& t) {
  std::vector<std::uint32_t> end(t.onions.size(), 0);
  auto mark = [&](std::uint64_t id, std::uint32_t round) {
    if (end[id] == 0) end[id] = round;
  };
  for (const auto& e : t.drops) mark(e.onion_id, e.round);
  for (const auto& e : t.merges) mark(e.dropped_onion, e.round);
  for (const auto& e : t.strands) mark(e.onion_id, e.round);
  for (const auto& e : t.deliveries) mark(e.onion_id, e.round);
  return end;
}

std::uint32_t live_merging_after(const Transcript& t, PartyId party, std::uint32_t round) {
  const auto end = terminal_rounds(t);
  std::uint32_t live = 0;
  for (const auto& a : t.onions) {
    if (a.kind == OnionKind::Merging && a.origin == party && (end[a.onion_id] == 0 || end[a.onion_id] > round)) ++live;
  }
  return live;
}

SurvivalTable survival_fractions(const Transcript& t) {
  SurvivalTable s;
  const auto end = terminal_rounds(t);
  const std::uint32_t d = t.params.protocol == Protocol::Strawman ? 1 : t.params.d;
  for (std::uint32_t l = 1; l <= t.params.total_epochs(); ++l) {
    const std::uint32_t round = l * d;
    std::vector<std::uint32_t> row(t.params.n_parties, 0);
    for (const auto& a : t.onions) {
      if (a.kind == OnionKind::Merging && (end[a.onion_id] == 0 || end[a.onion_id] > round)) ++row[a.origin.slot()];
    }
    s.rounds.push_back(round);
    s.counts.push_back(std::move(row));
  }
  return s;
}

CostReport onion_cost(const Transcript& t) {
  CostReport c;
  const std::uint32_t n = t.params.n_parties;
  c.out.assign(n, 0);
  c.per_round.assign(t.rounds, 0);
  for (const auto& tx : t.transmissions) {
    ++c.out[tx.sender.slot()];
    ++c.per_round[tx.round - 1];
    ++c.total_transmissions;
  }
  std::uint64_t honest_out = 0;
  for (std::uint32_t s = 0; s < n; ++s) {
    const PartyId p{s + 1};
    if (t.is_corrupted(p)) continue;
    ++c.honest_parties;
    honest_out += c.out[s];
    if (s < t.formed_per_party.size()) c.max_formed = std::max(c.max_formed, t.formed_per_party[s]);
  }
  c.onion_cost = c.honest_parties ? static_cast<double>(honest_out) / c.honest_parties : 0.0;
  c.formed_within_bound = c.max_formed <= 3 * t.params.chi;
  return c;
}

std::vector<double> dropped_checkpoint_fractions(const Transcript& t) {
  const std::uint32_t d = t.params.protocol == Protocol::Strawman ? 1 : t.params.d;
  std::vector<bool> counted(t.onions.size(), false);
  std::uint64_t total = 0;
  for (const auto& a : t.onions) {
    if (a.kind == OnionKind::Checkpoint && !t.is_corrupted(a.origin) && !t.is_corrupted(a.verifier)) {
      counted[a.onion_id] = true;
      ++total;
    }
  }
  std::vector<double> out;
  for (std::uint32_t l = 1; l <= t.params.total_epochs() + 1; ++l) {
    const std::uint32_t before = (l - 1) * d;
    std::uint64_t dropped = 0;
    for (const auto& e : t.drops) dropped += counted[e.onion_id] && e.round <= before;
    out.push_back(total ? static_cast<double>(dropped) / total : 0.0);
  }
  return out;
}

RendezvousAudit audit_merge_rendezvous(const Transcript& t) {
  RendezvousAudit audit;
  const auto& p = t.params;
  const std::uint32_t h = p.tree_epochs();
  const std::uint32_t bits = h - 1;
  auto leaf_bit = [&](std::uint32_t leaf, std::uint32_t b) { return (leaf >> (bits - 1 - b)) & 1u; };
  std::map<std::uint32_t, std::uint32_t> merges_by_origin;
  for (const auto& m : t.merges) {
    const auto& a = t.onions[m.survivor_onion];
    const auto& b = t.onions[m.dropped_onion];
    if (a.kind != OnionKind::Merging || b.kind != OnionKind::Merging || a.origin != b.origin) {
      ++audit.violations;
      audit.details.push_back("round " + std::to_string(m.round) + ": merge outside a single merging set");
      continue;
    }
    ++audit.checked;
    ++merges_by_origin[a.origin.value()];
    // First tree segment shared by both leaves: the shortest common suffix
    // of their labels, reached t* levels above the leaves.
    std::uint32_t level = bits;
    while (level > 0 && leaf_bit(a.leaf, level - 1) == leaf_bit(b.leaf, level - 1)) --level;
    const std::uint32_t pos = p.protocol == Protocol::Pibfly ? (p.mixing_epochs() + level - 1) * p.d : level * p.d;
    const auto& pa = t.plans[m.survivor_onion];
    const auto& pb = t.plans[m.dropped_onion];
    const bool ok = level >= 1 && pos < pa.nonces.size() && m.round == pos + 1 && pa.path[pos] == m.party &&
                    pb.path[pos] == m.party && pa.nonces[pos] == m.nonce && pb.nonces[pos] == m.nonce;
    if (!ok) {
      ++audit.violations;
      audit.details.push_back("round " + std::to_string(m.round) + " party " + std::to_string(m.party.value()) +
                              ": predicted round " + std::to_string(pos + 1));
    }
  }
  if (t.drops.empty() && t.strands.empty()) {
    for (std::uint32_t i = 1; i <= p.n_parties; ++i) {
      const std::uint32_t got = merges_by_origin[i];
      if (got < p.chi - 1) audit.missing += p.chi - 1 - got;
    }
  }
  return audit;
}

bool drops_respect_corruption(const Transcript& t) {
  return std::all_of(t.drops.begin(), t.drops.end(), [&](const DropEvent& e) { return t.is_corrupted(e.holder); });
}

bool terminal_events_partition(const Transcript& t) {
  std::vector<std::uint32_t> hits(t.onions.size(), 0);
  for (const auto& e : t.drops) ++hits[e.onion_id];
  for (const auto& e : t.merges) ++hits[e.dropped_onion];
  for (const auto& e : t.strands) ++hits[e.onion_id];
  for (const auto& e : t.deliveries) ++hits[e.onion_id];
  return std::all_of(hits.begin(), hits.end(), [](std::uint32_t h) { return h == 1; });
}

void write_equalizing_csv(std::ostream& out, const EqualizingReport& r, const std::string& echo) {
  out << "# " << echo << '\n';
  out << "trials,i,j,r,tv_vr,tv_vector,ci_low,ci_high,radius,isolated0,isolated1,isolated_vr_zero0,"
         "isolated_vr_pos0,isolated_vr_zero1,isolated_vr_pos1,vr_hist0,vr_hist1\n";
  auto hist = [](const std::map<std::uint32_t, std::uint32_t>& h) {
    std::string s;
    for (const auto& [k, c] : h) s += (s.empty() ? "" : ";") + std::to_string(k) + ":" + std::to_string(c);
    return s;
  };
  out << r.trials << ',' << r.i.value() << ',' << r.j.value() << ',' << r.r.value() << ',' << num(r.tv_vr) << ','
      << num(r.tv_vector) << ',' << num(r.ci_low) << ',' << num(r.ci_high) << ',' << num(r.radius) << ','
      << r.isolated0 << ',' << r.isolated1 << ',' << r.isolated_vr_zero0 << ',' << r.isolated_vr_pos0 << ','
      << r.isolated_vr_zero1 << ',' << r.isolated_vr_pos1 << ',' << hist(r.vr_hist0) << ',' << hist(r.vr_hist1)
      << '\n';
}

void write_isolation_csv(std::ostream& out, const IsolationResult& r, const std::string& echo) {
  out << "# " << echo << '\n';
  out << "n,green,sample,trials,exact_num,exact_den,exact,empirical,relative_error,kappa_power\n";
  out << r.n << ',' << r.green << ',' << r.sample << ',' << r.trials << ',' << u128(r.exact_num) << ','
      << u128(r.exact_den) << ',' << num(r.exact) << ',' << num(r.empirical) << ',' << num(r.relative_error) << ','
      << num(r.kappa_power) << '\n';
}

void write_zeta_csv(std::ostream& out, const std::vector<double>& alpha, const std::string& echo) {
  out << "# " << echo << '\n';
  out << "epoch,alpha,expected_zeta\n";
  const auto z = zeta_recursion(alpha);
  for (std::size_t l = 0; l < z.size(); ++l) {
    out << l + 1 << ',' << (l < alpha.size() ? num(alpha[l]) : "") << ',' << num(z[l]) << '\n';
  }
}

void write_pairs_csv(std::ostream& out, const PairsOracleResult& r, const std::string& echo) {
  out << "# " << echo << '\n';
  out << "u,v,trials,formula_num,formula_den,formula,empirical,exhaustive_match\n";
  out << r.u << ',' << r.v << ',' << r.trials << ',' << r.formula_num << ',' << r.formula_den << ','
      << num(r.formula) << ',' << num(r.empirical) << ','
      << (r.exhaustive_match ? (*r.exhaustive_match ? "true" : "false") : "") << '\n';
}

void write_bins_csv(std::ostream& out, const BallsBinsResult& r, const std::string& echo) {
  out << "# " << echo << '\n';
  out << "balls,bins,log_lambda,trials,in_regime,success_fraction,mean_nonempty,closed_form\n";
  out << r.balls << ',' << r.bins << ',' << num(r.log_lambda) << ',' << r.trials << ','
      << (r.in_regime ? "true" : "false") << ',' << num(r.success_fraction) << ',' << num(r.mean_nonempty) << ','
      << num(r.closed_form) << '\n';
}

void write_cost_csv(std::ostream& out, const CostReport& r, const std::string& echo) {
  out << "# " << echo << '\n';
  out << "party,out\n";
  for (std::size_t s = 0; s < r.out.size(); ++s) out << s + 1 << ',' << r.out[s] << '\n';
  out << "# total_transmissions=" << r.total_transmissions << " honest_parties=" << r.honest_parties
      << " onion_cost=" << num(r.onion_cost) << " max_formed=" << r.max_formed
      << " formed_within_bound=" << (r.formed_within_bound ? "true" : "false") << '\n';
}

void write_survival_csv(std::ostream& out, const SurvivalTable& s, const std::string& echo) {
  out << "# " << echo << '\n';
  out << "round,party,live_merging\n";
  for (std::size_t row = 0; row < s.rounds.size(); ++row) {
    for (std::size_t p = 0; p < s.counts[row].size(); ++p) {
      out << s.rounds[row] << ',' << p + 1 << ',' << s.counts[row][p] << '\n';
    }
  }
}

}  // namespace onionsim
