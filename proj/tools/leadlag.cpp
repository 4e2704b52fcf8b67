#include <iostream>

#include "leadlag/cli.hpp"

int main(int argc, char** argv) {
  return leadlag::cli::dispatch(argc, argv, std::cout, std::cerr);
}
