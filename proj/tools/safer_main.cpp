#include <iostream>

#include "safer/cli.hpp"

int main(int argc, char** argv) {
  return safer::cli::run(argc, argv, std::cout, std::cerr);
}
