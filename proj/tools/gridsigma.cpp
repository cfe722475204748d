#include <iostream>
#include <string>
#include <vector>

#include "gridsigma/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gridsigma::cli::run(args, std::cout, std::cerr);
}
