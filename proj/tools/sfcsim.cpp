#include <string>
#include <vector>

#include "sfcsim/cli.hpp"

int main(int argc, char** argv) {
  return sfcsim::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
