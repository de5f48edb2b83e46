#include "c2f/cli.hpp"

int main(int argc, char** argv) { return c2f::run_cli(argc, argv); }
