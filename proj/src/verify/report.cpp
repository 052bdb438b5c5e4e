#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "regret/verify.hpp"

namespace regret::verify {

std::string OracleReport::to_json() const {
  nlohmann::json j;
  j["test"] = name;
  j["value"] = value;
  j["oracle"] = oracle;
  j["rel_gap"] = rel_gap;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  return j.dump();
}

OracleReport compare(const std::string& name, double value, double oracle, double tolerance) {
  OracleReport r{name, value, oracle, 0.0, tolerance, false};
  r.rel_gap = std::abs(value - oracle) / std::max(1.0, std::abs(oracle));
  r.pass = std::isfinite(r.rel_gap) && r.rel_gap <= tolerance;
  return r;
}

OracleReport upper_bound(const std::string& name, double value, double bound, double tolerance) {
  OracleReport r{name, value, bound, 0.0, tolerance, false};
  r.rel_gap = std::max(0.0, value - bound);
  r.pass = std::isfinite(value) && value <= bound + tolerance;
  return r;
}

void write_jsonl(std::ostream& os, const std::vector<OracleReport>& reports) {
  for (const auto& r : reports) os << r.to_json() << '\n';
}

}  // namespace regret::verify
