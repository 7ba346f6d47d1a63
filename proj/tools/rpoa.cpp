#include <iostream>
#include <string>
#include <vector>

#include "rpoa/cli/app.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return rpoa::cli::run_app(args, std::cout, std::cerr);
}
