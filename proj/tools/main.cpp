#include "infothermo/cli.hpp"

int main(int argc, char** argv) { return infothermo::cli::run_cli(argc, argv); }
