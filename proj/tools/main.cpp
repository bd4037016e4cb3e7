#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return accdor::cli::run_command(argc, argv, std::cout, std::cerr);
}
