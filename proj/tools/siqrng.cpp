#include <iostream>

#include "siqrng/cli.hpp"

int main(int argc, char** argv) { return siqrng::run_cli(argc, argv, std::cout, std::cerr); }
