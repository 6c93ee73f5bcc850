#include <iostream>

#include "prestamo/cli.hpp"

int main(int argc, char** argv) {
  return prestamo::cli::run(argc, argv, std::cout, std::cerr);
}
