#include <iostream>
#include <string>
#include <vector>

#include "fitcoef/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fitcoef::cli::parse_and_dispatch(args, std::cout, std::cerr);
}
