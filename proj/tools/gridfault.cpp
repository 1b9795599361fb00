#include "gridfault/cli/app.hpp"

int main(int argc, char** argv) { return gridfault::cli::run_cli(argc, argv); }
