#include <iostream>

#include "tastesim/cli.hpp"

int main(int argc, char** argv) {
  return tastesim::cli::run(argc, argv, std::cout, std::cerr);
}
