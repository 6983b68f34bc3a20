#include <iostream>

#include "iaa/cli.hpp"

int main(int argc, char** argv) { return iaa::cli_main(argc, argv, std::cout, std::cerr); }
