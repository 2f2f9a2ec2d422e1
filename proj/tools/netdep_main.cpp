#include <vector>

#include "netdep/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return netdep::run_cli(args);
}
