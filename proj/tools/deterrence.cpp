#include <deterrence/cli.hpp>

int main(int argc, char** argv) { return deterrence::cli::run_cli(argc, argv); }
