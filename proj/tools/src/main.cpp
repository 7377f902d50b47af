#include <iostream>
#include <string>
#include <vector>

#include "moldsched/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return moldsched::cli::run_cli(args, std::cout, std::cerr);
}
