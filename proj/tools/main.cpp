#include <string>
#include <vector>

#include "mdpst/cli.hpp"

int main(int argc, char** argv) {
  return mdpst::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
