// Acceptance-suite binary: one PASS/FAIL line per criterion.
#include <cstring>
#include <iostream>

#include "fkmc/acceptance.hpp"

int main(int argc, char** argv) {
  fkmc::Suite suite = fkmc::Suite::full;
  int workers = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--suite") && i + 1 < argc) {
      const std::string v = argv[++i];
      if (v == "quick")
        suite = fkmc::Suite::quick;
      else if (v == "full")
        suite = fkmc::Suite::full;
      else {
        std::cerr << "unknown suite: " << v << "\n";
        return 2;
      }
    } else if (!std::strcmp(argv[i], "--workers") && i + 1 < argc) {
      workers = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: fkmc_acceptance [--suite quick|full] [--workers N]\n";
      return 2;
    }
  }
  return fkmc::run_acceptance(suite, std::cout, workers) == 0 ? 0 : 1;
}
