#include <iostream>

#include "choquet/cli.hpp"

int main(int argc, char** argv) { return choquet::cli::run(argc, argv, std::cout, std::cerr); }
