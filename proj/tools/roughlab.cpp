#include "roughlab/cli/runner.hpp"

int main(int argc, char** argv) { return roughlab::cli::main_entry(argc, argv); }
