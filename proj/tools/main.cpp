#include "bloch/cli.hpp"

int main(int argc, char** argv) { return bloch::cli_main(argc, argv); }
