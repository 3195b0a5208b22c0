#include <iostream>

#include "nsplan/cli.hpp"

int main(int argc, char** argv) {
    return nsplan::cli_main(argc, argv, std::cout, std::cerr);
}
