#include <iostream>

#include "fiesta/cli/main.hpp"

int main(int argc, char** argv) { return fiesta::cli::main(argc, argv, std::cout, std::cerr); }
