#include <iostream>

#include "scb/cli.hpp"

int main(int argc, char** argv) { return scb::run_command(argc, argv, std::cout, std::cerr); }
