#include <iostream>

#include "conjscope_cli/cli.hpp"

int main(int argc, char** argv) { return conjscope::cli::run(argc, argv, std::cout, std::cerr); }
