#include <iostream>
#include <string>
#include <vector>

#include "feoc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return feoc::run_cli(args, std::cout, std::cerr);
}
