#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"

using namespace onionsim;

namespace {

// Drops every link it sees, honest or not.
class RogueStrategy final : public AdversaryStrategy {
 public:
  std::string name() const override { return "rogue"; }
  std::vector<std::size_t> decide(const AdversaryView& view, std::uint32_t round, const OracleView*) override {
    std::vector<std::size_t> all(view.round_links(round).size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
};

// Records whether it was ever handed ground truth.
class SpyStrategy final : public AdversaryStrategy {
 public:
  std::string name() const override { return "spy"; }
  std::vector<std::size_t> decide(const AdversaryView&, std::uint32_t, const OracleView* oracle) override {
    saw_oracle = saw_oracle || oracle != nullptr;
    return {};
  }
  bool saw_oracle = false;
};

AdversaryView view_with(std::uint32_t n, std::vector<std::uint32_t> corrupted, std::vector<Link> links) {
  AdversaryView v;
  v.n_parties = n;
  v.corrupted_mask.assign(n, false);
  for (auto c : corrupted) {
    v.corrupted.push_back(PartyId{c});
    v.corrupted_mask[c - 1] = true;
  }
  v.links.push_back(std::move(links));
  return v;
}

}  // namespace

TEST_SUITE("adversaries") {
  TEST_CASE("passive adversary never drops and corrupts floor(kappa N)") {
    const Transcript t = testing::passive_run(testing::pibfly16(), 2);
    CHECK(t.drops.empty());
    CHECK(t.aborts.empty());
    CHECK(t.corrupted.size() == 4);
    CHECK(t.mode == StrategyMode::Realistic);
  }

  TEST_CASE("isolating drops exactly the target's onions to corrupted parties") {
    const auto p = make_strawman_protocol(16, 3, 0.25);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      IsolatingStrategy s(PartyId{5});
      const Transcript t = run(p, SimpleInput::random(16, seed), s, seed);
      CHECK_FALSE(t.is_corrupted(PartyId{5}));
      std::uint64_t expected = 0;
      for (const auto& tx : t.transmissions) expected += tx.sender == PartyId{5} && t.is_corrupted(tx.receiver);
      CHECK(t.drops.size() == expected);
      for (const auto& d : t.drops) CHECK(d.sender == PartyId{5});
      // The target's own onion is dropped whenever its first hop is corrupted.
      const auto& first = t.plans[4].path.front();
      const bool dropped_first = std::any_of(t.drops.begin(), t.drops.end(),
                                             [](const DropEvent& d) { return d.onion_id == 4 && d.round == 1; });
      CHECK(dropped_first == t.is_corrupted(first));
    }
  }

  TEST_CASE("a target that transmits nothing is isolated vacuously") {
    IsolatingStrategy s(PartyId{2});
    const auto view = view_with(4, {3}, {Link{PartyId{1}, PartyId{3}, HandleId{0, 1}}});
    s.begin_run(view, testing::pibfly16());
    CHECK(s.decide(view, 1, nullptr).empty());
    CHECK(s.isolated());
    CHECK(s.report().isolated == true);
  }

  TEST_CASE("isolation probability in the strawman given three distinct receivers") {
    // Conditional on the target transmitting to exactly three distinct
    // parties, isolation needs all three to be corrupted: C(20,3)/C(99,3)
    // with the target itself kept honest.
    const auto p = make_strawman_protocol(100, 3, 0.2);
    std::uint32_t eligible = 0, isolated = 0;
    for (std::uint64_t seed = 0; seed < 100000; ++seed) {
      IsolatingStrategy s(PartyId{1});
      const Transcript t = run(p, SimpleInput::random(100, seed), s, seed);
      std::set<std::uint32_t> receivers;
      for (const auto& tx : t.transmissions) {
        if (tx.sender == PartyId{1}) receivers.insert(tx.receiver.value());
      }
      if (receivers.size() != 3 || receivers.contains(1)) continue;
      ++eligible;
      isolated += *t.report.isolated;
    }
    const double rate = static_cast<double>(isolated) / eligible;
    MESSAGE("eligible runs " << eligible << ", isolated " << isolated);
    CHECK(rate == doctest::Approx(1140.0 / 161700.0).epsilon(0.2));
  }

  TEST_CASE("uniform isolating target is uniform and delegates") {
    std::vector<int> count(16, 0);
    const int n = 10000;
    for (int s = 0; s < n; ++s) ++count[sample_isolation_target(16, static_cast<std::uint64_t>(s)).slot()];
    const double mean = n / 16.0, sigma = std::sqrt(n * (1.0 / 16) * (15.0 / 16));
    for (int c : count) CHECK(std::abs(c - mean) <= 3 * sigma);
    CHECK(sample_isolation_target(1, 1234) == PartyId{1});

    const auto p = make_strawman_protocol(16, 3, 0.25);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      UniformIsolatingStrategy u;
      const Transcript a = run(p, SimpleInput::random(16, seed), u, seed);
      IsolatingStrategy direct(sample_isolation_target(16, split_seed(seed, 3)));
      const Transcript b = run(p, SimpleInput::random(16, seed), direct, seed);
      CHECK(a.report.target == b.report.target);
      CHECK(a.drops.size() == b.drops.size());
      std::string la = testing::event_log(a), lb = testing::event_log(b);
      la = la.substr(la.find('\n'));
      lb = lb.substr(lb.find('\n'));
      CHECK(la == lb);
    }
  }

  TEST_CASE("sender targeting acts only in rounds 1 and 2") {
    const auto p = testing::pibfly16();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      SenderTargetingStrategy s(PartyId{3});
      const Transcript t = run(p, SimpleInput::random(16, seed), s, seed);
      for (const auto& d : t.drops) CHECK(d.round <= 2);
      for (const auto& tx : t.transmissions) {
        if (tx.round == 1 && tx.sender == PartyId{3} && t.is_corrupted(tx.receiver)) {
          CHECK(std::any_of(t.drops.begin(), t.drops.end(),
                            [&](const DropEvent& d) { return d.round == 1 && d.handle == tx.handle; }));
        }
      }
      for (const auto& d : t.drops) {
        if (d.round == 1) CHECK(d.sender == PartyId{3});
      }
    }
  }

  TEST_CASE("sender targeting dichotomy on a small seed set") {
    const auto p = testing::pibfly16();
    const std::uint32_t L = p.mixing_epochs();
    const std::uint32_t need = static_cast<std::uint32_t>(std::ceil((1 - p.kappa) * p.chi / 3.0));
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      SenderTargetingStrategy s(PartyId{1});
      const Transcript t = run(p, SimpleInput::random(16, seed), s, seed);
      const bool aborted = std::any_of(t.aborts.begin(), t.aborts.end(),
                                       [&](const AbortEvent& a) { return a.round <= (L + 1) * p.d; });
      CHECK((aborted || live_merging_after(t, PartyId{1}, L * p.d) >= need));
    }
  }

  TEST_CASE("all-zero singleton schedule matches passive") {
    const auto p = testing::pibfly16();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      SingletonDroppingStrategy s(std::vector<double>(p.total_epochs(), 0.0));
      PassiveStrategy q;
      const SimpleInput in = SimpleInput::random(16, seed);
      const Transcript a = run(p, in, s, seed);
      const Transcript b = run(p, in, q, seed);
      CHECK(a.mode == StrategyMode::Oracle);
      CHECK(a.drops.empty());
      std::string la = testing::event_log(a), lb = testing::event_log(b);
      CHECK(la.substr(la.find('\n')) == lb.substr(lb.find('\n')));
    }
  }

  TEST_CASE("singleton schedule length must match the epoch count") {
    SingletonDroppingStrategy s(std::vector<double>(3, 0.1));
    CHECK_THROWS_AS(run(testing::pibfly16(), SimpleInput::random(16, 1), s, 1), ConfigError);
    CHECK_THROWS_AS(SingletonDroppingStrategy({1.5}), ConfigError);
  }

  TEST_CASE("realized dropped-checkpoint fraction tracks the recursion without aborts") {
    auto p = testing::pitree16(4, 4);
    p.threshold = 1e9;
    const std::vector<double> alpha{0.3, 0.3, 0.0};
    const auto expect = zeta_recursion(alpha);
    std::vector<double> mean(expect.size(), 0.0);
    const int seeds = 40;
    for (int seed = 1; seed <= seeds; ++seed) {
      SingletonDroppingStrategy s(alpha);
      const Transcript t = run(p, SimpleInput::random(16, seed), s, seed);
      REQUIRE(t.aborts.empty());
      const auto z = dropped_checkpoint_fractions(t);
      for (std::size_t l = 0; l < z.size(); ++l) mean[l] += z[l] / seeds;
    }
    for (std::size_t l = 0; l < expect.size(); ++l) CHECK(std::abs(mean[l] - expect[l]) <= 0.1);
  }

  TEST_CASE("pair dropping only removes whole pairs at corrupted parties") {
    PairDroppingStrategy s;
    const auto view = view_with(8, {1, 2},
                                {Link{PartyId{5}, PartyId{1}, HandleId{0, 1}}, Link{PartyId{6}, PartyId{2}, HandleId{0, 2}},
                                 Link{PartyId{5}, PartyId{1}, HandleId{0, 3}}, Link{PartyId{6}, PartyId{7}, HandleId{0, 4}},
                                 Link{PartyId{5}, PartyId{7}, HandleId{0, 5}}, Link{PartyId{6}, PartyId{8}, HandleId{0, 6}}});
    OracleView ov;
    ov.epoch = 2;
    ov.epoch_start = true;
    ov.mixing_epochs = 0;
    ov.d = 2;
    for (std::size_t i = 0; i < 6; ++i) ov.onions.push_back(OracleOnion{i, i, OnionKind::Merging, PartyId{3}, true});
    ov.onions[0].partner_link = 1;  // both corrupted
    ov.onions[1].partner_link = 0;
    ov.onions[2].partner_link = 3;  // split
    ov.onions[3].partner_link = 2;
    ov.onions[4].partner_link = 5;  // both honest
    ov.onions[5].partner_link = 4;
    auto drops = s.decide(view, 1, &ov);
    std::sort(drops.begin(), drops.end());
    CHECK(drops == std::vector<std::size_t>{0, 1});
    ov.epoch_start = false;
    CHECK(s.decide(view, 1, &ov).empty());
  }

  TEST_CASE("pair dropping in full runs") {
    const auto p = testing::pibfly16();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      PairDroppingStrategy s;
      const Transcript t = run(p, SimpleInput::random(16, seed), s, seed);
      CHECK(drops_respect_corruption(t));
      for (const auto& d : t.drops) {
        CHECK(t.onions[d.onion_id].kind == OnionKind::Merging);
        CHECK((d.round - 1) % p.d == 0);
        CHECK((d.round - 1) / p.d + 1 > p.mixing_epochs());
      }
      CHECK(t.drops.size() % 2 == 0);
    }
  }

  TEST_CASE("the engine rejects drops outside the adversary's power") {
    RogueStrategy s;
    CHECK_THROWS_AS(run(testing::pibfly16(), SimpleInput::random(16, 1), s, 1), SimulationError);
  }

  TEST_CASE("realistic strategies never receive ground truth") {
    SpyStrategy s;
    run(testing::pibfly16(), SimpleInput::random(16, 1), s, 1);
    CHECK_FALSE(s.saw_oracle);
  }

  TEST_CASE("drop sequences are deterministic") {
    const auto p = testing::pibfly16();
    std::vector<double> schedule(p.total_epochs(), 0.05);
    auto drops_of = [&](std::uint64_t seed) {
      SingletonDroppingStrategy s(schedule);
      const Transcript t = run(p, SimpleInput::random(16, seed), s, seed);
      std::vector<HandleId> v;
      for (const auto& d : t.drops) v.push_back(d.handle);
      return v;
    };
    CHECK(drops_of(7) == drops_of(7));
  }

  TEST_CASE("strategy factory") {
    CHECK(make_strategy("passive", std::nullopt)->name() == "passive");
    CHECK(make_strategy("pair_dropping", std::nullopt)->mode() == StrategyMode::Oracle);
    CHECK_THROWS_AS(make_strategy("isolating", std::nullopt), ConfigError);
    CHECK_THROWS_AS(make_strategy("nope", std::nullopt), ConfigError);
  }
}
