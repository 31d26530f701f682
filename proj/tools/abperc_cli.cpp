#include <iostream>
#include <string>
#include <vector>

#include "abperc/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return abperc::run(args, std::cout, std::cerr);
}
