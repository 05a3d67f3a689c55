#pragma once

#include "cntuple/schema.hpp"
#include "cntuple/value.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace cntuple {

// Synthetic three-hadron decay event in the style of the LHCb B2HHH n-tuple:
// per hadron a momentum vector, two PID probabilities and a muon flag, plus
// one variable-length hit list.
struct Event {
  std::array<double, 3> px{};
  std::array<double, 3> py{};
  std::array<double, 3> pz{};
  std::array<double, 3> prob_k{};
  std::array<double, 3> prob_pi{};
  std::array<std::int32_t, 3> is_muon{};
  std::vector<std::int32_t> hits;
};

// 19 leaf fields flattening to 20 columns (hits adds an index column):
// H{1,2,3}_{PX,PY,PZ,ProbK,ProbPi,isMuon} and hits.
const Schema& workload_schema();

Value event_to_value(const Event& event);

// Deterministic seeded generator. Distributions: momenta normal(0, 5);
// probabilities uniform[0,1); isMuon Bernoulli(0.1); hits length Poisson(2)
// clamped to [0,8], hit values uniform in [0, 10000). Normals use an explicit
// Box-Muller transform so the draw stream does not depend on the stdlib.
class EventGenerator {
public:
  explicit EventGenerator(std::uint64_t seed) : rng_(seed) {}

  Event next();

private:
  double uniform01();
  double normal(double sigma);

  std::mt19937_64 rng_;
};

} // namespace cntuple
