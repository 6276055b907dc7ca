#include "besi/checks.hpp"

#include <cstdio>
#include <cstdlib>
#include <vector>

// acceptance [criterion...]: one line per criterion, exit 1 if any fails
int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= besi::kCriteria; ++i) ids.push_back(i);
  bool all = true;
  for (int id : ids) {
    besi::CheckResult r = besi::run_criterion(id);
    std::printf("c%02d %s %-34s %7.2fs  %s\n", id, r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
