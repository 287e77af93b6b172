#include "randkol/cli.hpp"

int main(int argc, char** argv) { return randkol::cli::run_main(argc, argv); }
