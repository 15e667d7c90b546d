#include <iostream>
#include <string>
#include <vector>

#include "markov_krieger/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return mk::run_cli(args, std::cout, std::cerr);
}
