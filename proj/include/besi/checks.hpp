#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace besi {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

constexpr int kCriteria = 10;

// one acceptance criterion (1..10); never throws, errors become failures
CheckResult run_criterion(int id, std::uint64_t seed = 1);

// criteria grouped by module: diophantine, cocycles, cantor, flows, all
std::vector<int> suite_criteria(const std::string& suite);

}  // namespace besi
