#include "calib/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return calib::cli::run_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
