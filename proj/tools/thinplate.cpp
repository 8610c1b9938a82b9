#include "thinplate/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return thinplate::run_cli(argc, argv, std::cout, std::cerr); }
