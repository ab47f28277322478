#include <iostream>

#include "lscd/cli/cli.hpp"

int main(int argc, char** argv) {
  return lscd::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
