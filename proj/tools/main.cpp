#include <cstdlib>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> env;
  if (const char* s = std::getenv("TRACTORLAB_SEED")) env = s;
  return tractorlab::cli::run(args, std::cout, std::cerr, env);
}
