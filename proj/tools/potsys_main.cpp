#include <potsys/cli.hpp>

#include <iostream>

auto main(int argc, char ** argv) -> int
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return potsys::cli::run(std::move(args), std::cin, std::cout, std::cerr);
}
