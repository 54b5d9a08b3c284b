#include "fairbandit_cli.hpp"

int main(int argc, char** argv) { return fairbandit::cli::run(argc, argv); }
