// Runs every acceptance criterion; one PASS/FAIL line each. Exit code 1 if any fail.

#include <iostream>

#include "mbol/harness/acceptance.hpp"

int main() {
  mbol::harness::AcceptanceOptions opt;
  opt.progress = &std::cout;
  const auto results = mbol::harness::run_acceptance(opt);
  int passed = 0;
  for (const auto& r : results) passed += r.passed;
  std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}
