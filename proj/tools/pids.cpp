#include "pids/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return pids::cli::main(argc, argv, std::cout, std::cerr);
}
