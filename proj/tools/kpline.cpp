#include <cstdlib>
#include <iostream>

#include "kpline/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kpline::run_cli(args, std::cout, std::cerr, [](const char* name) { return std::getenv(name); });
}
