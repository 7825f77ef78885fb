#include "cli.hpp"

int main(int argc, char** argv) { return hessems::cli::run_command(argc, argv); }
