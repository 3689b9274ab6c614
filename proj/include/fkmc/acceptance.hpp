#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fkmc {

enum class Suite { quick, full };

struct CriterionOutcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Runs the acceptance criteria, printing one PASS/FAIL line per criterion.
// Returns the number of failures. quick shrinks path counts (same
// thresholds) to stay under a couple of minutes.
int run_acceptance(Suite suite, std::ostream& os, int workers = 0);

std::vector<CriterionOutcome> acceptance_outcomes(Suite suite, int workers = 0);

}  // namespace fkmc
