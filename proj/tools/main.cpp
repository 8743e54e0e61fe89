#include <iostream>

#include "sparsenet/cli.hpp"

int main(int argc, char** argv) { return sparsenet::cli::run(argc, argv, std::cout, std::cerr); }
