#include <iostream>

#include "viscfp/cli.hpp"

int main(int argc, char** argv) { return viscfp::cli::run_cli(argc, argv, std::cout, std::cerr); }
