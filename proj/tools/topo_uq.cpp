#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return topouq::RunCli(argc, argv, std::cout, std::cerr); }
