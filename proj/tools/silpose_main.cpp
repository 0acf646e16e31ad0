#include <iostream>

#include "silpose/cli.hpp"

int main(int argc, char** argv) { return silpose::cli::run(argc, argv, std::cout, std::cerr); }
