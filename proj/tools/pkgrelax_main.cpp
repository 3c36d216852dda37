#include <iostream>
#include <string>
#include <vector>

#include "pkgrelax/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pkgrelax::run_cli(args, std::cout, std::cerr);
}
