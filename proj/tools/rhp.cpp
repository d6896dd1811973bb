#include <iostream>

#include "rhp/cli.hpp"

int main(int argc, char** argv) { return rhp::run_cli(argc, argv, std::cout, std::cerr); }
