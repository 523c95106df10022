#include "podnolab/cli.hpp"

int main(int argc, char** argv) { return podnolab::cli_main(argc, argv); }
