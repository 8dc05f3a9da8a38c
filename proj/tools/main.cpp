#include <iostream>

#include "nvmflow/cli/cli.hpp"

int main(int argc, char** argv)
{
    return nvmflow::cli::run_cli(argc, argv, std::cout, std::cerr);
}
