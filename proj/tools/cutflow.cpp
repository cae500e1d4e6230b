#include <iostream>

#include "cutflow/cli.hpp"

int main(int argc, char** argv) { return cutflow::cli_main(argc, argv, std::cout, std::cerr); }
