#include <iostream>

#include "amortlab/cli.hpp"

int main(int argc, char** argv) { return amortlab::run_cli(argc, argv, std::cout, std::cerr); }
