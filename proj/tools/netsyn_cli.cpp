#include <iostream>

#include "netsyn/cli.hpp"

int main(int argc, char** argv) {
  return netsyn::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
