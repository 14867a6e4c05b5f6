#include <iostream>

#include "dsts/cli.hpp"

int main(int argc, char** argv) { return dsts::cli::run(argc, argv, std::cout, std::cerr); }
