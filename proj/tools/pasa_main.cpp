#include <iostream>

#include "pasa/cli.hpp"

int main(int argc, char** argv) { return pasa::run_cli(argc, argv, std::cout, std::cerr); }
