#include "mctrack/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mctrack::cli::cli_main(argc, argv, std::cout, std::cerr); }
