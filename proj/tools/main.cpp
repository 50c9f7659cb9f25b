#include <iostream>

#include "pursuit/cli.hpp"

int main(int argc, char** argv) { return pursuit::cli::main_entry(argc, argv, std::cout, std::cerr); }
