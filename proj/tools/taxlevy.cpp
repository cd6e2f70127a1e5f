#include <iostream>

#include "taxlevy/cli.hpp"

int main(int argc, char** argv) { return taxlevy::cli::run(argc, argv, std::cout, std::cerr); }
