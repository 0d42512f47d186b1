#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "onionsim/config.hpp"

#ifndef ONIONSIM_BIN
#error "ONIONSIM_BIN must name the CLI executable"
#endif

namespace fs = std::filesystem;
using namespace onionsim;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("onionsim_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int invoke(const std::string& args) {
  const std::string cmd = std::string("\"") + ONIONSIM_BIN + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config parsing") {
    const auto c = ExperimentConfig::from_json_text(
        R"({"protocol":"pitree","n_parties":8,"chi":2,"seed":5,"adversary":{"name":"isolating","target":3},)"
        R"("input":{"permutation":[2,3,4,5,6,7,8,1]},"oracles":{"u":6}})");
    CHECK(c.params.protocol == Protocol::Pitree);
    CHECK(c.params.n_parties == 8);
    CHECK(c.params.chi == 2);
    CHECK(c.seed == 5);
    CHECK(c.adversary.target == 3u);
    CHECK(c.oracles.u == 6);
    CHECK(c.input().recipient(PartyId{8}) == PartyId{1});
    CHECK_NOTHROW(c.validate());
    CHECK(ExperimentConfig::from_json_text(c.to_json_text()).to_json_text() == c.to_json_text());
    CHECK(c.echo().find("onionsim 1.0.0") != std::string::npos);
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"bogus":1})"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"chi":"four"})"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"adversary":{"nme":"passive"}})"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/onionsim.json"), ConfigError);
    auto oracle = ExperimentConfig::from_json_text(R"({"adversary":{"name":"pair_dropping"}})");
    CHECK_THROWS_AS(oracle.strategy(), ConfigError);
    oracle.adversary.oracle_mode = true;
    CHECK(oracle.strategy()->name() == "pair_dropping");
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"input":{"permutation":[1,1]},"n_parties":2})").validate(),
                    ConfigError);
  }

  TEST_CASE("run writes its outputs and is reproducible") {
    const fs::path dir = scratch("run");
    const std::string out = (dir / "a").string();
    REQUIRE(invoke("run --seed 3 --out " + out) == 0);
    const std::string log1 = slurp(dir / "a" / "transcript.log");
    const std::string cost1 = slurp(dir / "a" / "cost.csv");
    CHECK(log1.rfind("# onionsim-transcript v1", 0) == 0);
    CHECK(slurp(dir / "a" / "summary.txt").find("deliveries=16") != std::string::npos);
    REQUIRE(invoke("run --seed 3 --out " + out) == 0);
    CHECK(slurp(dir / "a" / "transcript.log") == log1);
    CHECK(slurp(dir / "a" / "cost.csv") == cost1);
    REQUIRE(invoke("run --seed 4 --out " + out) == 0);
    CHECK(slurp(dir / "a" / "transcript.log") != log1);
  }

  TEST_CASE("config file and overrides") {
    const fs::path dir = scratch("cfg");
    {
      std::ofstream f(dir / "cfg.json");
      f << R"({"protocol":"strawman","n_parties":8,"strawman_hops":2,"seed":9})";
    }
    REQUIRE(invoke("run --config " + (dir / "cfg.json").string() + " --n 12 --out " + (dir / "o").string()) == 0);
    const std::string summary = slurp(dir / "o" / "summary.txt");
    CHECK(summary.find("\"n_parties\":12") != std::string::npos);
    CHECK(summary.find("\"protocol\":\"strawman\"") != std::string::npos);
    CHECK(summary.find("deliveries=12") != std::string::npos);
  }

  TEST_CASE("exit codes") {
    const std::string out = "--out " + scratch("codes").string();
    CHECK(invoke("run --protocol nope " + out) == 2);
    CHECK(invoke("run --n 0 " + out) == 2);
    CHECK(invoke("frobnicate") == 2);
    CHECK(invoke("run --config /nonexistent.json " + out) == 2);
    CHECK(invoke("run --adversary singleton_dropping " + out) == 2);
    CHECK(invoke("equalize --trials 99 --i 1 --j 2 " + out) == 2);
    CHECK(invoke("lowerbound --trials 50 --i 1 --j 2 --hops 3 --n 16 " + out) == 2);
    CHECK(invoke("oracles nope " + out) == 2);
    CHECK(invoke("--version") == 0);
  }

  TEST_CASE("oracle subcommands") {
    const fs::path dir = scratch("oracles");
    REQUIRE(invoke("oracles pairs --u 4 --v 2 --trials 1000 --out " + dir.string()) == 0);
    CHECK(slurp(dir / "pairs.csv").find("\n4,2,1000,12,7,") != std::string::npos);
    CHECK(slurp(dir / "pairs.csv").find(",true\n") != std::string::npos);
    REQUIRE(invoke("oracles zeta --alpha 0.3,0.3 --out " + dir.string()) == 0);
    const std::string zeta = slurp(dir / "zeta.csv");
    CHECK(zeta.find("\n1,0.3,0\n") != std::string::npos);
    CHECK(zeta.find("\n2,0.3,0.3\n") != std::string::npos);
    CHECK(zeta.find("\n3,,0.51\n") != std::string::npos);
    REQUIRE(invoke("oracles isolation --n 100 --kappa 0.2 --sample 3 --trials 1000 --out " + dir.string()) == 0);
    CHECK(slurp(dir / "isolation.csv").find("\n100,20,3,1000,19,2695,") != std::string::npos);
    CHECK(invoke("oracles zeta --alpha 0.3,x --out " + dir.string()) == 2);
  }

  TEST_CASE("lowerbound and equalize produce csv files") {
    const fs::path dir = scratch("lb");
    REQUIRE(invoke("lowerbound --n 16 --kappa 0.25 --hops 0 --i 1 --j 2 --trials 100 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "lowerbound.csv"));
    CHECK(fs::exists(dir / "isolation.csv"));
    REQUIRE(invoke("equalize --protocol strawman --hops 1 --i 1 --j 2 --trials 100 --out " + dir.string()) == 0);
    CHECK(slurp(dir / "equalize.csv").find("trials,i,j,r,tv_vr") != std::string::npos);
  }
}
