#include <iostream>

#include "atlforge/cli.hpp"

int main(int argc, char** argv) { return atlforge::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
