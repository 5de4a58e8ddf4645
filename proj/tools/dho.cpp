#include <iostream>
#include <string>
#include <vector>

#include "dho/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dho::cli::run(args, std::cout, std::cerr);
}
