#include "mcpc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mcpc::run_command(argc, argv, std::cout, std::cerr); }
