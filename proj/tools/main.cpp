#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  return hallucount::cli::run_cli(argc, argv, std::cout, std::cerr);
}
