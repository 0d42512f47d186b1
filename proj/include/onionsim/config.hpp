#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "onionsim/adversary.hpp"
#include "onionsim/engine.hpp"
#include "onionsim/params.hpp"

namespace onionsim {

inline constexpr const char* kVersion = "onionsim 1.0.0";

struct AdversaryConfig {
  std::string name = "passive";
  std::optional<std::uint32_t> target;
  std::vector<double> schedule;
  bool oracle_mode = false;
};

struct OracleConfig {
  std::uint32_t u = 4, v = 2;
  bool exhaustive = true;
  std::uint32_t balls = 16, bins = 64;
  double log_lambda = 4.0;
  std::uint32_t sample = 3;
  std::vector<double> alpha{0.3, 0.3};
};

// Everything that determines an experiment's output bytes.
struct ExperimentConfig {
  ProtocolParams params;
  AdversaryConfig adversary;
  std::vector<std::uint32_t> permutation;  // explicit input; empty means seeded
  std::uint64_t input_seed = 1;
  std::uint64_t seed = 1;
  std::uint32_t trials = 1;
  std::string out = "out";
  std::optional<std::uint32_t> i, j;
  OracleConfig oracles;

  // Parses the JSON config format. Unknown keys and wrong types throw
  // ConfigError.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string to_json_text() const;  // compact, keys sorted
  // Version plus fully resolved configuration, for embedding in outputs.
  std::string echo() const;

  SimpleInput input() const;
  std::unique_ptr<AdversaryStrategy> strategy() const;
  // Checks parameters, input and adversary selection together.
  void validate() const;
};

}  // namespace onionsim
