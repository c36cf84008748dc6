#include <iostream>
#include <string>
#include <vector>

#include "skewfib/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return skewfib::cli::runMain(args, std::cout, std::cerr);
}
