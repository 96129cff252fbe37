#include <iostream>

#include "ltg/cli.hpp"

int main(int argc, char** argv) { return ltg::cli::run_cli(argc, argv, std::cout, std::cerr); }
