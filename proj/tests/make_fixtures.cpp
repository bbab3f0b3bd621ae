// Regenerates the bundled fixture set: make_fixtures <output-dir>
#include <iostream>

#include "fixture_set.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 2;
  }
  mammosynth::testing::write_fixture_set(argv[1]);
  return 0;
}
