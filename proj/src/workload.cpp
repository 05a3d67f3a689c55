#include "cntuple/workload.hpp"

#include <cmath>
#include <numbers>

namespace cntuple {

const Schema& workload_schema() {
  static const Schema schema = [] {
    std::vector<FieldDescriptor> fields;
    for (const char* hadron : {"H1", "H2", "H3"}) {
      std::string prefix(hadron);
      fields.push_back(make_scalar(prefix + "_PX", ScalarType::kFloat64));
      fields.push_back(make_scalar(prefix + "_PY", ScalarType::kFloat64));
      fields.push_back(make_scalar(prefix + "_PZ", ScalarType::kFloat64));
      fields.push_back(make_scalar(prefix + "_ProbK", ScalarType::kFloat64));
      fields.push_back(make_scalar(prefix + "_ProbPi", ScalarType::kFloat64));
      fields.push_back(make_scalar(prefix + "_isMuon", ScalarType::kInt32));
    }
    fields.push_back(make_vector("hits", item_scalar(ScalarType::kInt32)));
    return Schema(std::move(fields));
  }();
  return schema;
}

Value event_to_value(const Event& event) {
  std::vector<Value> members;
  members.reserve(19);
  for (int h = 0; h < 3; ++h) {
    members.push_back(Value::f64(event.px[h]));
    members.push_back(Value::f64(event.py[h]));
    members.push_back(Value::f64(event.pz[h]));
    members.push_back(Value::f64(event.prob_k[h]));
    members.push_back(Value::f64(event.prob_pi[h]));
    members.push_back(Value::i32(event.is_muon[h]));
  }
  std::vector<Value> hits;
  hits.reserve(event.hits.size());
  for (std::int32_t v : event.hits) hits.push_back(Value::i32(v));
  members.push_back(Value::vec(std::move(hits)));
  return Value::rec(std::move(members));
}

double EventGenerator::uniform01() {
  // 53-bit mantissa uniform in [0, 1)
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double EventGenerator::normal(double sigma) {
  double u1 = 1.0 - uniform01(); // (0, 1], keeps the log finite
  double u2 = uniform01();
  return sigma * std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Event EventGenerator::next() {
  constexpr double kMomentumSigma = 5.0;
  constexpr double kMuonProbability = 0.1;
  constexpr double kHitsLambda = 2.0;
  constexpr int kMaxHits = 8;

  Event event;
  for (int h = 0; h < 3; ++h) {
    event.px[h] = normal(kMomentumSigma);
    event.py[h] = normal(kMomentumSigma);
    event.pz[h] = normal(kMomentumSigma);
    event.prob_k[h] = uniform01();
    event.prob_pi[h] = uniform01();
    event.is_muon[h] = uniform01() < kMuonProbability ? 1 : 0;
  }
  // Knuth's product-of-uniforms Poisson draw, clamped to kMaxHits.
  double limit = std::exp(-kHitsLambda);
  int n_hits = 0;
  double product = uniform01();
  while (product > limit && n_hits < kMaxHits) {
    ++n_hits;
    product *= uniform01();
  }
  event.hits.reserve(n_hits);
  for (int i = 0; i < n_hits; ++i) {
    event.hits.push_back(static_cast<std::int32_t>(rng_() % 10000));
  }
  return event;
}

} // namespace cntuple
