#include <iostream>

#include "mvforge/cli.h"

int main(int argc, char** argv) { return mvforge::run_cli(argc, argv, std::cout, std::cerr); }
