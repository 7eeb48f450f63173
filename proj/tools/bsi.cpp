#include <iostream>
#include <string>
#include <vector>

#include "bsi/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bsi::cli::run(args, std::cout, std::cerr);
}
