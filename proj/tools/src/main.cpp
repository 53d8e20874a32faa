#include "colorgs/cli.hpp"

#include <string>
#include <vector>

int main(int argc, char** argv) {
  return colorgs::cli::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
