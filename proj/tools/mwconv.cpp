#include <iostream>

#include "mwconv/cli.hpp"

int main(int argc, char** argv) {
  return mwconv::run_command(argc, argv, std::cout, std::cerr);
}
