// Sample one random digraph and pack k edge-disjoint Hamilton cycles into it.
//
//   single_trial [n] [c] [k] [seed]

#include <cstdlib>
#include <iostream>

#include "hampack/hampack.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 5000;
  const double c = argc > 2 ? std::strtod(argv[2], nullptr) : 50.0;
  const unsigned k = argc > 3 ? static_cast<unsigned>(std::strtoul(argv[3], nullptr, 10)) : 1;
  const std::uint64_t seed = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 1;

  const auto params = hampack::ModelParams::from_average_degree(n, c, k);
  hampack::TrialConfig config;
  config.trace = [](const std::string& line) { std::cerr << line << '\n'; };
  const auto record = hampack::run_trial(params, seed, config);
  std::cout << hampack::trial_json(record).dump(2) << '\n';
  return record.success ? 0 : 2;
}
