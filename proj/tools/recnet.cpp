#include <iostream>

#include "recnet/experiment.hpp"

int main(int argc, char** argv) { return recnet::run_cli(argc, argv, std::cout, std::cerr); }
