#include <iostream>

#include "gaitgender/cli.hpp"

int main(int argc, char** argv) { return gaitgender::run_cli(argc, argv, std::cout, std::cerr); }
