#include "vnfp/cli_io.hpp"

int main(int argc, char** argv)
{
    return vnfp::run_cli(argc, argv);
}
