#include <iostream>

#include "fieldlink/tools/cli.hpp"

int main(int argc, char** argv) {
  return fieldlink::tools::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
