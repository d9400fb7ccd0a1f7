#include <iostream>
#include <string>
#include <vector>

#include "ldptails_cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ldptails::cli::run(args, std::cout, std::cerr);
}
