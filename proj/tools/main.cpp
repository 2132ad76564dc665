#include <iostream>

#include "dualres/cli.hpp"

int main(int argc, char** argv) { return dualres::run_cli(argc, argv, std::cout, std::cerr); }
