#include <iostream>
#include <string>
#include <vector>

#include "metacomment/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return metacomment::cli::run(args, std::cout, std::cerr);
}
