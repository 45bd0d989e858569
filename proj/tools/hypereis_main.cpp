#include <iostream>
#include <string>
#include <vector>

#include "hypereis/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return hypereis::cli::run_args(args, std::cout, std::cerr);
}
