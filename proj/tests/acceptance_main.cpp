// Acceptance runner for ctest: one PASS/FAIL line per criterion, nonzero exit
// if any criterion fails. Extra arguments are forwarded to `selftest`.
#include <cstdlib>
#include <iostream>

#include "kpline/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args{"selftest"};
  args.insert(args.end(), argv + 1, argv + argc);
  return kpline::run_cli(args, std::cout, std::cerr, [](const char* name) { return std::getenv(name); });
}
