#include "pvcoat/cli.hpp"

int main(int argc, char** argv) { return pvcoat::run_cli(argc, argv); }
