#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return procex::cli::dispatch(argc, argv, std::cout, std::cerr); }
