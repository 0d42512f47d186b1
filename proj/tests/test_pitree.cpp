#include <doctest.h>

#include <map>
#include <set>

#include "onionsim/pitree.hpp"

using namespace onionsim;

namespace {

PitreeParams tree_params(std::uint32_t chi, std::uint32_t d, std::uint32_t n = 16) {
  return PitreeParams::with_defaults(n, 16, 0.25, chi, d);
}

}  // namespace

TEST_SUITE("pitree-former") {
  TEST_CASE("bernoulli_from_prf edges and rate") {
    CHECK(bernoulli_from_prf(~0ULL, 1.0));
    CHECK_FALSE(bernoulli_from_prf(0, 0.0));
    CHECK(bernoulli_from_prf(0, 0.25));
    CHECK_FALSE(bernoulli_from_prf(1ULL << 62, 0.25));
    CHECK(bernoulli_from_prf((1ULL << 62) - 1, 0.25));
    Rng rng(1);
    int hits = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) hits += bernoulli_from_prf(rng.next_u64(), 0.25);
    CHECK(static_cast<double>(hits) / n == doctest::Approx(0.25).epsilon(0.008));
  }

  TEST_CASE("checkpoint data are symmetric between owner and verifier") {
    const auto keys = KeyMaterial::generate(16, 3);
    Prf prf(PrfMode::Keyed, 3);
    const auto p = tree_params(4, 2);
    std::map<std::uint32_t, std::vector<CheckpointDatum>> sets;
    for (std::uint32_t i = 1; i <= 16; ++i) sets[i] = gen_ckpt_data(PartyId{i}, p, keys, prf);
    for (std::uint32_t i = 1; i <= 16; ++i) {
      for (const auto& dat : sets[i]) {
        CHECK_FALSE(dat.checkpoint.is_empty());
        const auto& other = sets[dat.verifier.value()];
        const CheckpointDatum mirror{dat.epoch, PartyId{i}, dat.checkpoint};
        CHECK(std::find(other.begin(), other.end(), mirror) != other.end());
      }
    }
  }

  TEST_CASE("zero frequency gives no checkpoints") {
    const auto keys = KeyMaterial::generate(8, 3);
    Prf prf(PrfMode::Keyed, 3);
    auto p = tree_params(4, 2, 8);
    p.ckpt_freq = 0.0;
    CHECK(gen_ckpt_data(PartyId{1}, p, keys, prf).empty());
  }

  TEST_CASE("mean checkpoint count is chi") {
    const auto p = tree_params(4, 2);
    REQUIRE(p.epochs() == 3);
    double total = 0.0;
    const int seeds = 10000;
    for (int s = 0; s < seeds; ++s) {
      const auto keys = KeyMaterial::generate(16, static_cast<std::uint64_t>(s));
      Prf prf(PrfMode::Keyed, static_cast<std::uint64_t>(s));
      total += static_cast<double>(gen_ckpt_data(PartyId{1}, p, keys, prf).size());
    }
    CHECK(total / seeds == doctest::Approx(4.0).epsilon(0.025));
  }

  TEST_CASE("checkpoint onion layout") {
    auto p = tree_params(2, 3);
    REQUIRE(p.epochs() == 2);
    Rng rng(9);
    const CheckpointDatum dat{1, PartyId{7}, Nonce{0xC0FFEE}};
    const RoutingPlan plan = make_checkpoint_plan(PartyId{2}, dat, p, rng);
    CHECK(plan.path.size() == 7);
    CHECK(plan.path[2] == PartyId{7});
    CHECK(plan.nonces[2] == Nonce{0xC0FFEE});
    CHECK(plan.message == Payload::empty());
    for (auto n : plan.nonces) CHECK_FALSE(n.is_empty());

    OnionRegistry reg(1);
    HandleId h = reg.form_onion(plan);
    for (std::size_t hop = 0; hop < 3; ++hop) {
      const auto r = std::get<Relay>(reg.proc_onion(plan.path[hop], h));
      if (hop == 2) CHECK(r.nonce == Nonce{0xC0FFEE});
      h = r.handle;
    }
    CHECK_THROWS_AS(make_checkpoint_plan(PartyId{2}, CheckpointDatum{3, PartyId{1}, Nonce{1}}, p, rng), ConfigError);
    CHECK_THROWS_AS(make_checkpoint_plan(PartyId{2}, CheckpointDatum{0, PartyId{1}, Nonce{1}}, p, rng), ConfigError);
  }

  TEST_CASE("checkpoint onion first hop is uniform") {
    const auto p = tree_params(4, 2);
    Rng rng(12);
    std::vector<int> count(16, 0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      ++count[make_checkpoint_plan(PartyId{1}, CheckpointDatum{2, PartyId{3}, Nonce{5}}, p, rng).path[0].slot()];
    }
    const double mean = n / 16.0;
    const double sigma = std::sqrt(n * (1.0 / 16) * (15.0 / 16));
    for (int c : count) CHECK(std::abs(c - mean) <= 3 * sigma + 1e-9);
  }

  TEST_CASE("merging onions for chi=2 share the root segment") {
    const auto p = tree_params(2, 2);
    Rng rng(4);
    const auto plans = make_merging_plans(build_merge_tree(p, rng), PartyId{1}, Payload::message(1), PartyId{9});
    REQUIRE(plans.size() == 2);
    for (const auto& pl : plans) {
      CHECK(pl.path.size() == 5);
      CHECK(pl.path.back() == PartyId{9});
    }
    for (std::size_t k = 2; k < 4; ++k) {
      CHECK(plans[0].path[k] == plans[1].path[k]);
      CHECK(plans[0].nonces[k] == plans[1].nonces[k]);
    }
    CHECK(plans[0].nonces[0] != plans[1].nonces[0]);
  }

  TEST_CASE("siblings first coincide at position d+1 for chi=4") {
    const std::uint32_t d = 3;
    const auto p = tree_params(4, d);
    Rng rng(8);
    const auto tree = build_merge_tree(p, rng);
    CHECK(tree.nodes.size() == 7);
    CHECK(tree.leaf_labels() == std::vector<std::string>{"00", "01", "10", "11"});
    const auto plans = make_merging_plans(tree, PartyId{1}, Payload::message(1), PartyId{2});
    // Leaves 00 and 10 are siblings under node "0"; 01 and 11 under "1".
    for (auto [a, b] : {std::pair{0, 2}, std::pair{1, 3}}) {
      std::size_t first = plans[a].nonces.size();
      for (std::size_t k = 0; k < plans[a].nonces.size(); ++k) {
        if (plans[a].nonces[k] == plans[b].nonces[k]) {
          first = k;
          break;
        }
      }
      CHECK(first == d);  // 0-based index d is path position d+1
      CHECK(plans[a].path[d] == plans[b].path[d]);
    }
    // Cousins only meet at the root segment.
    CHECK(plans[0].nonces[d] != plans[1].nonces[d]);
    CHECK(plans[0].nonces[2 * d] == plans[1].nonces[2 * d]);
    for (const auto& [label, node] : tree.nodes) {
      CHECK(node.parties.size() == d);
      for (auto n : node.nonces) CHECK_FALSE(n.is_empty());
    }
  }

  TEST_CASE("degenerate tree with chi=1") {
    const auto p = tree_params(1, 3);
    Rng rng(2);
    OnionRegistry reg(1);
    const auto hs = form_merging_onions(reg, PartyId{1}, Payload::message(1), PartyId{4}, p, rng);
    REQUIRE(hs.size() == 1);
    CHECK(reg.find(hs[0])->plan.path.size() == 4);
  }

  TEST_CASE("chi must be a power of two") {
    auto p = tree_params(4, 2);
    p.chi = 3;
    Rng rng(1);
    OnionRegistry reg(1);
    CHECK_THROWS_AS(form_merging_onions(reg, PartyId{1}, Payload::message(1), PartyId{2}, p, rng), ConfigError);
  }

  TEST_CASE("threshold helper") {
    CHECK(pitree_threshold(0.1, 0.25, 0.1, 16) ==
          doctest::Approx(2 * 0.9 * std::pow(0.75, 3) * 0.25 * std::pow(4.0, 1.1)));
  }
}
