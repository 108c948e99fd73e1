#include "rppg/cli.hpp"

int main(int argc, char** argv) { return rppg::cli::main(argc, argv); }
