#include <string>
#include <vector>

#include "aqc/cli.hpp"

int main(int argc, char** argv) {
  return aqc::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
