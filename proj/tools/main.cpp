#include "cuspdet/cli.hpp"

int main(int argc, char** argv) { return cuspdet::cli::main(argc, argv); }
