#include "genplan/cli.hpp"

int main(int argc, char** argv) { return genplan::cli::run(argc, argv); }
