#include "peakopt/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return peakopt::cli::run(argc, argv, std::cout, std::cerr);
}
