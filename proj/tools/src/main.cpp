#include <iostream>

#include "manirank/cli/commands.hpp"

int main(int argc, char** argv) { return manirank::cli::run(argc, argv, std::cout, std::cerr); }
