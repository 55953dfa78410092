#pragma once

// Verification battery: the acceptance criteria and the module invariants,
// each a named check with a fixed seed.

#include <functional>
#include <string>
#include <vector>

#include "osl/flexible.hpp"

namespace osl {

enum class Scale { Fast, Full };

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::string id;
  std::string name;
  std::function<Outcome(Scale scale, unsigned jobs)> run;
  double budget_seconds = 0.0;  // enforced at full scale; 0 means none
};

struct CheckResult {
  std::string id;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Criteria 1 to 13, in order.
const std::vector<Check>& acceptance_checks();
// Module invariants not already covered by an acceptance criterion.
const std::vector<Check>& invariant_checks();

// Runs checks in order; exceptions count as failures with their message, as
// do full-scale runs over budget.
std::vector<CheckResult> run_checks(const std::vector<Check>& checks, Scale scale, unsigned jobs,
                                    const std::function<void(const CheckResult&)>& on_result = {});

// The four-cell eta used by the construction criteria.
EtaSpec reference_eta();
inline constexpr double kReferenceBudget = 1.0;

}  // namespace osl
