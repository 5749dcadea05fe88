#include <iostream>

#include "ergocert/cli.hpp"

int main(int argc, char** argv) { return ergocert::cli::run(argc, argv, std::cout, std::cerr); }
