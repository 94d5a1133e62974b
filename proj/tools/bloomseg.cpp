#include <iostream>

#include "bloomseg/cli.hpp"

int main(int argc, char** argv) { return bloomseg::run_cli(argc, argv, std::cout, std::cerr); }
