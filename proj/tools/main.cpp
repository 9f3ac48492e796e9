#include <iostream>
#include <vector>

#include "ecalp/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ecalp::cli::run(args, std::cout, std::cerr);
}
