#include <iostream>

#include "coinflow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return coinflow::cli::run(args, std::cout, std::cerr);
}
