#include "affect/cli.hpp"

int main(int argc, char** argv) { return affect::cli::run_main(argc, argv); }
