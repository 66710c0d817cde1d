#include "vidtl/cli.hpp"

int main(int argc, char** argv) { return vidtl::run_cli(argc, argv); }
