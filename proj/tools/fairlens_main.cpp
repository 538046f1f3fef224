#include <iostream>

#include "fairlens/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fairlens::cli::run(args, std::cout, std::cerr);
}
