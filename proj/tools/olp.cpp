#include <iostream>

#include "olp/cli.hpp"

int main(int argc, char** argv) { return olp::cli::run_cli(argc, argv, std::cout, std::cerr); }
