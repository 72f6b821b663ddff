#include "cli.hpp"

int main(int argc, char** argv) { return audvault::cli_main(argc, argv); }
