#include <iostream>
#include <string>
#include <vector>

#include "silt_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return silt::cli::run(args, std::cout, std::cerr);
}
