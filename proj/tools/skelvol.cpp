#include <iostream>
#include <string>
#include <vector>

#include "skelvol/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return skelvol::run_cli(args, std::cout, std::cerr);
}
