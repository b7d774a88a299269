#include <iostream>

#include "qsfunm/cli.hpp"

int main(int argc, char** argv) { return qsfunm::run_cli(argc, argv, std::cout, std::cerr); }
