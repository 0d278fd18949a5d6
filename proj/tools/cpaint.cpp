#include <iostream>

#include "cpaint/cli.hpp"

int main(int argc, char** argv) { return cpaint::run_cli(argc, argv, std::cout, std::cerr); }
