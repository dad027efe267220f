#include "mdiqkd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mdiqkd::run_cli(argc, argv, std::cout, std::cerr); }
