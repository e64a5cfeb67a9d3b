#include "locclab/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return locc::run_cli(argc, argv, std::cout, std::cerr);
}
