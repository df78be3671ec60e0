#include <iostream>
#include <string>
#include <vector>

#include "pairshap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pairshap::run_cli(args, std::cout, std::cerr);
}
