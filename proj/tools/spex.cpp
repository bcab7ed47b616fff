#include "spex/cli.hpp"

int main(int argc, char** argv) { return spex::cli::run(argc, argv); }
