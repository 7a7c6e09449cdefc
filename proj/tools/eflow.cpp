#include <iostream>

#include "eflow/cli/commands.hpp"

int main(int argc, char **argv) { return eflow::cli::run(argc, argv, std::cout, std::cerr); }
