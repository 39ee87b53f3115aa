#include <iostream>
#include <string>
#include <vector>

#include "culture/cli.hpp"

int main(int argc, char** argv) {
  return culture::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
