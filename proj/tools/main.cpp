#include <iostream>
#include <string>
#include <vector>

#include "kh/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kh::cli::dispatch(args, std::cout, std::cerr);
}
