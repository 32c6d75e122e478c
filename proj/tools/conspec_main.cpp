#include <iostream>
#include <string>
#include <vector>

#include "conspec/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return conspec::cli::run(args, std::cout, std::cerr);
}
