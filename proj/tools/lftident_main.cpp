#include <iostream>

#include "lftident/cli.hpp"

int main(int argc, char** argv) { return lftident::cli::run(argc, argv, std::cout, std::cerr); }
