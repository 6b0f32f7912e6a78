#include "evopf/cli.hpp"

int main(int argc, char** argv) {
    return evopf::cli_main(argc, argv);
}
