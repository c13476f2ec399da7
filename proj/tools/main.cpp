#include "flowphd/cli.hpp"

int main(int argc, char** argv) {
    return flowphd::cli_main(argc, argv);
}
