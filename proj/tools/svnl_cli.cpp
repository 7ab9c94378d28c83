#include "svnl/commands.hpp"

int main(int argc, char** argv) { return svnl::cli::run_cli(argc, argv); }
