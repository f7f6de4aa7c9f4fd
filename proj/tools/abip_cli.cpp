#include "abip/cli.hpp"

int main(int argc, char** argv)
{
    return abip::cli::run_cli(argc, argv);
}
