#include <iostream>

#include "l2e_cli/commands.hpp"

int main(int argc, char** argv)
{
    return l2e::cli::run(argc, argv, std::cout, std::cerr);
}
