#include "decontam/cli.hpp"

int main(int argc, char** argv) { return decontam::cli_main(argc, argv); }
