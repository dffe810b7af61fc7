// Acceptance suite entry point: runs the numbered desk-scale criteria given
// as arguments (all twelve when none are named) and prints one verdict line
// per criterion. Exit 0 only if every selected criterion passes.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "aclab/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace aclab;
  std::vector<int> ids;
  bool spotcheck = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "spotcheck") {
      spotcheck = true;
    } else {
      const int id = std::atoi(a.c_str());
      if (id < 1 || id > 12) {
        std::cerr << "criterion ids are 1..12 (or 'spotcheck'), got '" << a << "'\n";
        return 2;
      }
      ids.push_back(id);
    }
  }
  if (ids.empty() && !spotcheck)
    for (int i = 1; i <= 12; ++i) ids.push_back(i);

  bool all = true;
  try {
    if (spotcheck) {
      const CriterionResult r = oracle_spotcheck();
      std::cout << verdict_line(r) << std::endl;
      all = all && r.pass;
    }
    if (!ids.empty()) {
      DeskLab lab;
      for (const CriterionResult& r : run_criteria(lab, ids, &std::cout))
        all = all && r.pass;
    }
  } catch (const std::exception& e) {
    std::cout << "[FAIL] aborted: " << e.what() << std::endl;
    return 3;
  }
  return all ? 0 : 1;
}
