#include "denoise_bench/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return denoise_bench::run_cli(argc, argv, std::cout, std::cerr); }
