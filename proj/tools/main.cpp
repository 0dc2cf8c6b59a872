#include "cli.hpp"

int main(int argc, char** argv) { return aggrlab::cli_main(argc, argv); }
