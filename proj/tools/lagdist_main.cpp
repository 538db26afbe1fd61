#include <iostream>
#include <string>
#include <vector>

#include "lagdist/cli.hpp"

int main(int argc, char** argv) {
    return lagdist::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
