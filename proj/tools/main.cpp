#include "ddsddp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ddsddp::run_cli(argc, argv, std::cout, std::cerr); }
