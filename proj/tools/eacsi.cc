#include <iostream>

#include "eacsi/cli.h"

int main(int argc, char** argv) {
    return eacsi::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
