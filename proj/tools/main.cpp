#include <iostream>

#include "mammosynth/cli.hpp"

int main(int argc, char** argv) {
  return mammosynth::run_cli(argc, argv, std::cout, std::cerr);
}
