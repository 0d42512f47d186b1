#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"

using namespace onionsim;

namespace {

SimpleInput identity_shift(std::uint32_t n) {
  std::vector<PartyId> r;
  for (std::uint32_t i = 1; i <= n; ++i) r.push_back(PartyId{i % n + 1});
  return SimpleInput::from_permutation(r);
}

// One onion from party 2 through 1, 1 to 3, and one from party 4 that never
// arrives.
Transcript forced_path_fixture() {
  Transcript t;
  t.params.n_parties = 4;
  t.rounds = 3;
  t.onions.push_back(OnionAnnotation{0, OnionKind::Strawman, PartyId{2}, PartyId{3}});
  t.plans.push_back(RoutingPlan{Payload::message(2), {PartyId{1}, PartyId{1}, PartyId{3}}, {}, PartyId{2}});
  t.onions.push_back(OnionAnnotation{1, OnionKind::Strawman, PartyId{4}, PartyId{3}});
  t.plans.push_back(RoutingPlan{Payload::message(4), {PartyId{1}, PartyId{3}}, {}, PartyId{4}});
  t.transmissions = {{1, PartyId{2}, PartyId{1}, HandleId{0, 1}, 0},
                     {2, PartyId{1}, PartyId{1}, HandleId{0, 2}, 0},
                     {3, PartyId{1}, PartyId{3}, HandleId{0, 3}, 0},
                     {1, PartyId{4}, PartyId{1}, HandleId{0, 4}, 1}};
  t.deliveries = {{3, PartyId{3}, Payload::message(2), 0}};
  t.drops = {{2, PartyId{1}, PartyId{3}, HandleId{0, 5}, 1}};
  return t;
}

}  // namespace

TEST_SUITE("analytics") {
  TEST_CASE("swap exchanges recipient and message") {
    const SimpleInput s = identity_shift(4);
    const SimpleInput w = swap(s, PartyId{1}, PartyId{3});
    CHECK(w.recipient(PartyId{1}) == PartyId{4});
    CHECK(w.recipient(PartyId{3}) == PartyId{2});
    CHECK(w.messages[0] == 3);
    CHECK(w.messages[2] == 1);
    CHECK(w.recipient(PartyId{2}) == s.recipient(PartyId{2}));
    CHECK(swap(w, PartyId{3}, PartyId{1}) == s);
    CHECK_THROWS_AS(swap(s, PartyId{2}, PartyId{2}), ConfigError);
  }

  TEST_CASE("hops count on a forced path") {
    const Transcript t = forced_path_fixture();
    CHECK(hops_count(t, PartyId{2}, PartyId{1}, PartyId{3}) == 2);
    CHECK(hops_count(t, PartyId{4}, PartyId{1}, PartyId{3}) == 0);
    CHECK(hops_count(t, PartyId{2}, PartyId{3}, PartyId{3}) == 0);
  }

  TEST_CASE("cannot-affect check") {
    const SimpleInput sigma = SimpleInput::random(100, 5);
    auto direct = make_runner(make_strawman_protocol(100, 0, 0.2), "passive");
    const auto zero = cannot_affect_check(direct, sigma, PartyId{1}, PartyId{2}, 50, 9);
    CHECK(zero.mean_hops == 0.0);
    CHECK(zero.verdict);

    auto three = make_runner(make_strawman_protocol(100, 3, 0.2), "passive");
    const auto r = cannot_affect_check(three, sigma, PartyId{1}, PartyId{2}, 4000, 9);
    CHECK(r.mean_hops == doctest::Approx(0.03).epsilon(0.3));
    CHECK(r.verdict);
  }

  TEST_CASE("equalizing experiment under a passive adversary") {
    auto runner = make_runner(make_strawman_protocol(16, 0, 0.25), "passive");
    const auto rep = equalizing_experiment(runner, SimpleInput::random(16, 3), PartyId{1}, PartyId{2}, 100, 4);
    CHECK(rep.tv_vr == 0.0);
    CHECK(rep.tv_vector == 0.0);
    CHECK(rep.isolated0 == 0);
    CHECK_THROWS_AS(equalizing_experiment(runner, SimpleInput::random(16, 3), PartyId{1}, PartyId{2}, 99, 4),
                    ConfigError);
  }

  TEST_CASE("equalizing experiment against a direct-send isolation") {
    auto runner = make_runner(make_strawman_protocol(16, 0, 0.25), "isolating", PartyId{1});
    const auto rep = equalizing_experiment(runner, SimpleInput::random(16, 3), PartyId{1}, PartyId{2}, 400, 4);
    // Swapped: the target now sends to r, so isolation silences r.
    CHECK(rep.isolated1 > 0);
    CHECK(rep.isolated_vr_zero1 == rep.isolated1);
    CHECK(rep.isolated_vr_pos1 == 0);
    // Original: r still hears from j.
    CHECK(rep.isolated_vr_zero0 == 0);
    CHECK(rep.tv_vr > 0.1);
    CHECK(rep.ci_low <= rep.tv_vector);
    CHECK(rep.tv_vector <= rep.ci_high);
  }

  TEST_CASE("equalizing is symmetric in the swapped pair") {
    auto runner = make_runner(make_strawman_protocol(16, 2, 0.25), "passive");
    const SimpleInput s = SimpleInput::random(16, 8);
    const auto a = equalizing_experiment(runner, s, PartyId{3}, PartyId{5}, 100, 2, 0);
    const auto b = equalizing_experiment(runner, swap(s, PartyId{3}, PartyId{5}), PartyId{3}, PartyId{5}, 100, 2, 0);
    CHECK(a.tv_vector == b.tv_vector);
  }

  TEST_CASE("isolation probability") {
    const auto r = isolation_probability(100, 0.2, 3, 200000, 1);
    CHECK(r.green == 20);
    CHECK(static_cast<std::uint64_t>(r.exact_num) == 19);
    CHECK(static_cast<std::uint64_t>(r.exact_den) == 2695);
    CHECK(r.exact == doctest::Approx(0.00705).epsilon(0.001));
    CHECK(r.kappa_power == doctest::Approx(0.008));
    CHECK(r.relative_error < 0.1);
    CHECK(isolation_probability(10, 0.2, 3, 10, 1).exact == 0.0);
    CHECK_THROWS_AS(isolation_probability(3, 0.2, 4, 1, 1), ConfigError);
  }

  TEST_CASE("binomial coefficients") {
    CHECK(static_cast<std::uint64_t>(binomial(99, 3)) == 156849);
    CHECK(static_cast<std::uint64_t>(binomial(5, 7)) == 0);
    CHECK(static_cast<std::uint64_t>(binomial(60, 30)) == 118264581564861424ULL);
  }

  TEST_CASE("zeta recursion") {
    const auto z = zeta_recursion({0.3, 0.3});
    REQUIRE(z.size() == 3);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == doctest::Approx(0.3));
    CHECK(z[2] == doctest::Approx(0.3 + 0.7 * 0.3));
    CHECK(zeta_recursion({1.0, 1.0}).back() == 1.0);
    const auto m = zeta_recursion(std::vector<double>(20, 0.15));
    CHECK(std::is_sorted(m.begin(), m.end()));
    CHECK(m.back() <= 1.0);
    CHECK_THROWS_AS(zeta_recursion({-0.1}), ConfigError);
  }

  TEST_CASE("paired balls") {
    const auto r = pairs_expectation_oracle(4, 2, 200000, 3, true);
    CHECK(r.formula_num == 12);
    CHECK(r.formula_den == 7);
    CHECK(r.exhaustive_match == true);
    CHECK(r.empirical == doctest::Approx(12.0 / 7).epsilon(0.02));
    for (std::uint32_t u = 1; u <= 5; ++u) {
      for (std::uint32_t v = 1; v <= u; ++v) CHECK(pairs_expectation_oracle(u, v, 0, 0, true).exhaustive_match == true);
    }
    CHECK_THROWS_AS(pairs_expectation_oracle(3, 4, 1, 1, false), ConfigError);
    CHECK_THROWS_AS(pairs_expectation_oracle(13, 2, 1, 1, true), ConfigError);
  }

  TEST_CASE("most chosen balls are paired when the choice is dense") {
    const auto r = pairs_expectation_oracle(8, 6, 0, 0, false);
    CHECK(r.formula == doctest::Approx(12.0 * 11 / 15));
    CHECK(r.formula > 6.0);
  }

  TEST_CASE("balls into bins") {
    const auto r = balls_bins_oracle(16, 64, 4.0, 20000, 2);
    CHECK(r.in_regime);
    CHECK(r.success_fraction == 1.0);
    CHECK(r.mean_nonempty == doctest::Approx(r.closed_form).epsilon(0.01));
    CHECK_FALSE(balls_bins_oracle(40, 64, 4.0, 1, 2).in_regime);
    CHECK_THROWS_AS(balls_bins_oracle(1, 0, 1.0, 1, 1), ConfigError);
  }

  TEST_CASE("merging onion survival") {
    const auto p = testing::pibfly16();
    const Transcript t = testing::passive_run(p, 4);
    const auto s = survival_fractions(t);
    const std::uint32_t L = p.mixing_epochs();
    REQUIRE(s.rounds.size() == p.total_epochs());
    for (auto c : s.counts[0]) CHECK(c == p.chi);
    for (auto c : s.counts[L]) CHECK(c == p.chi / 2);
    // The last survivor is delivered one round after the final epoch ends.
    for (auto c : s.counts.back()) CHECK(c == 1);
    CHECK(live_merging_after(t, PartyId{1}, L * p.d) == p.chi);
  }

  TEST_CASE("survival is zero once everything is dropped") {
    Transcript t;
    t.params = testing::pitree16(2, 2);
    t.params.n_parties = 2;
    for (std::uint64_t id = 0; id < 4; ++id) {
      t.onions.push_back(OnionAnnotation{id, OnionKind::Merging, PartyId{static_cast<std::uint32_t>(id / 2 + 1)}});
      t.drops.push_back(DropEvent{1, PartyId{1}, PartyId{2}, HandleId{0, id}, id});
    }
    for (const auto& row : survival_fractions(t).counts) {
      for (auto c : row) CHECK(c == 0);
    }
  }

  TEST_CASE("onion cost") {
    const Transcript direct = testing::passive_run(make_strawman_protocol(16, 0, 0.25), 1);
    const auto c = onion_cost(direct);
    CHECK(c.onion_cost == 1.0);
    CHECK(c.total_transmissions == 16);
    CHECK(c.honest_parties == 12);

    Transcript empty;
    empty.params.n_parties = 4;
    CHECK(onion_cost(empty).onion_cost == 0.0);

    const Transcript t = testing::passive_run(testing::pibfly16(), 6);
    const auto r = onion_cost(t);
    std::uint64_t sum = 0;
    for (auto o : r.out) sum += o;
    CHECK(sum == r.total_transmissions);
    CHECK(r.total_transmissions == t.transmissions.size());
    std::uint64_t per_round = 0;
    for (auto o : r.per_round) per_round += o;
    CHECK(per_round == r.total_transmissions);
  }

  TEST_CASE("audits on passive runs") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      for (const auto& p : {testing::pitree16(4, 2), testing::pibfly16()}) {
        const Transcript t = testing::passive_run(p, seed);
        const auto a = audit_merge_rendezvous(t);
        CHECK(a.violations == 0);
        CHECK(a.missing == 0);
        CHECK(a.checked == p.n_parties * (p.chi - 1));
        CHECK(terminal_events_partition(t));
        CHECK(drops_respect_corruption(t));
      }
    }
  }

  TEST_CASE("csv writers echo their configuration") {
    std::ostringstream out;
    write_zeta_csv(out, {0.3, 0.3}, "cfg");
    CHECK(out.str().rfind("# cfg\nepoch,alpha,expected_zeta\n", 0) == 0);
    std::ostringstream pairs;
    write_pairs_csv(pairs, pairs_expectation_oracle(4, 2, 10, 1, true), "cfg");
    CHECK(pairs.str().find("\n4,2,10,12,7,") != std::string::npos);
  }
}
