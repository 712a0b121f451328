#include "vtseg/cli.hpp"

int main(int argc, char** argv)
{
    return vtseg::run_cli(argc, argv);
}
