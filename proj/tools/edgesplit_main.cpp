#include <iostream>
#include <string>
#include <vector>

#include "edgesplit/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return edgesplit::cli::dispatch(args, std::cout, std::cerr);
}
