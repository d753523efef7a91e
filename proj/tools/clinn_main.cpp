#include <iostream>
#include <string>
#include <vector>

#include "clinn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return clinn::RunCommand(args, std::cout, std::cerr);
}
